// Copyright 2026 The dpad Authors
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

#include <stdexcept>
#include <string>

namespace dpad {

// Base class for every error the library raises on purpose.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed caller input: shape mismatch, out-of-vocabulary token, bad ratio.
class InputError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of a closed form.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A precondition between components was violated (e.g. unclipped gradient
// rows handed to the noisy aggregator).
class ContractError : public Error {
 public:
  using Error::Error;
};

// On-disk data could not be parsed. Message names the byte offset.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Model construction from an inconsistent architecture.
class ArchError : public Error {
 public:
  using Error::Error;
};

// Training failed (divergent loss). Carries the epoch of the last finite state.
class TrainingError : public Error {
 public:
  TrainingError(const std::string& msg, int last_finite_epoch)
      : Error(msg), last_finite_epoch(last_finite_epoch) {}
  int last_finite_epoch;
};

// Synthetic generation cannot satisfy its contract.
class GenerationError : public Error {
 public:
  using Error::Error;
};

}  // namespace dpad
