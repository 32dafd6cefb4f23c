// Copyright 2026 The qblock authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qblock {

/// Base class of every error thrown by this library.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Bad argument values (overlapping qubits, wrong vector length, ...).
struct ValidationError : Error {
    using Error::Error;
};

/// Mismatched matrix/register dimensions.
struct ShapeError : Error {
    using Error::Error;
};

/// Index outside its documented range.
struct RangeError : Error {
    using Error::Error;
};

/// Unknown gate tag or unregistered gate name.
struct DispatchError : Error {
    using Error::Error;
};

/// Request exceeds the configured qubit/memory cap.
struct ResourceError : Error {
    using Error::Error;
};

/// Operation not defined for this node kind (e.g. mat of a measurement).
struct UnsupportedError : Error {
    using Error::Error;
};

/// A property query that cannot be decided at this size.
struct UndecidableError : Error {
    using Error::Error;
};

/// Projection onto a numerically zero-probability subspace.
struct RenormalizationError : Error {
    using Error::Error;
};

/// A block that has no text form in the script format.
struct SerializationError : Error {
    using Error::Error;
};

/// Script syntax or range failure; carries a 1-based source position.
struct ParseError : Error {
    std::size_t line;
    std::size_t column;
    ParseError(std::size_t line_, std::size_t col_, const std::string& msg)
        : Error("line " + std::to_string(line_) + ", column " + std::to_string(col_) + ": " + msg),
          line(line_),
          column(col_) {}
};

}  // namespace qblock
