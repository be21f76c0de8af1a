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

#include <vector>

namespace dpad::nn {

// One labeled example. Image models read `input` (pixels scaled to [0,1];
// autoencoders reconstruct it, the classifier predicts `label`). The LSTM
// reads `history` and predicts `next_token`.
struct Sample {
  std::vector<double> input;
  int label = -1;
  std::vector<int> history;
  int next_token = -1;
};

}  // namespace dpad::nn
