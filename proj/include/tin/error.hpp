/*
 * Copyright 2026 The TIN Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace tin {

// Root of the library's exception hierarchy. The subclasses map one-to-one
// onto the CLI exit codes (input: 2, data: 3, numeric: 4).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes of operands do not line up.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Malformed files, bad flags, I/O failures.
class InputError : public Error {
 public:
  using Error::Error;
};

// Well-formed input that is unusable for the requested operation
// (empty dataset, missing category, degenerate binning, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

// Non-finite values or failed numeric checks.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace tin
