/*
 * Copyright 2026 The MAFS Authors.
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

#ifndef MAFS_ERRORS_H_
#define MAFS_ERRORS_H_

#include <stdexcept>
#include <string>

namespace mafs {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes disagree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf encountered in an input, gradient, or intermediate.
class NumericError : public Error {
 public:
  using Error::Error;
};

// A caller broke a precondition that cannot be expressed in the types,
// e.g. backpropagating through a cache taken before a parameter update.
class ContractError : public Error {
 public:
  using Error::Error;
};

// Invalid argument value (out of range, empty, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Target or statistic carries no information (constant y, single class,
// constant filter output).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

// Training diverged.
class TrainingError : public Error {
 public:
  using Error::Error;
};

// Table lookup miss.
class LookupError : public Error {
 public:
  using Error::Error;
};

// Evaluation metric undefined for the given input.
class MetricError : public Error {
 public:
  using Error::Error;
};

// Hyperparameter search produced no usable trial.
class SearchError : public Error {
 public:
  using Error::Error;
};

// A file could not be opened, written, or renamed.
class IoError : public Error {
 public:
  using Error::Error;
};

// Malformed file, config, or flag. The CLI maps this to exit code 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace mafs

#endif  // MAFS_ERRORS_H_
