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

#include <string>

#include "dpad/nn/model.hpp"

namespace dpad::nn {

// Versioned binary model container:
//   magic "DPADCKP1", u32-LE header length, JSON header (arch descriptor and
//   tensor layout), u64-LE parameter count, little-endian f64 payload,
//   u64-LE FNV-1a hash of the payload bytes.
void save_checkpoint(const Model& model, const std::string& path);
Model load_checkpoint(const std::string& path);

}  // namespace dpad::nn
