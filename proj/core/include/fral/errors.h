/*
 * Copyright 2026 The fral Authors.
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

#ifndef FRAL_ERRORS_H_
#define FRAL_ERRORS_H_

#include <stdexcept>
#include <string>

namespace fral {

// Root of every error raised by the library. The CLI maps ConfigError to
// exit code 2 and everything else to exit code 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or unreadable input data (bad rows, missing columns).
class IngestionError : public Error {
 public:
  using Error::Error;
};

// Structurally valid input that violates a dataset or pool invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Experiment configuration that does not parse or does not validate.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Non-finite loss or parameter during optimization.
class TrainingError : public Error {
 public:
  using Error::Error;
};

// Shape or argument mismatch on a numerical routine.
class ShapeError : public Error {
 public:
  using Error::Error;
};

}  // namespace fral

#endif  // FRAL_ERRORS_H_
