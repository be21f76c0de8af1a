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
#include <vector>

namespace dpad::nn {

enum class ArchKind {
  kDenseAutoencoder,
  kConvAutoencoder,
  kLstmLm,
  kClassifier,
};

enum class LossKind {
  kReconstructionMse,  // autoencoders: per-pixel mean squared error
  kCrossEntropy,       // lstm-lm and classifier
};

std::string to_string(ArchKind k);
std::string to_string(LossKind k);
ArchKind arch_kind_from_string(const std::string& s);
LossKind loss_kind_from_string(const std::string& s);

// Architecture description for the four model families.
//
// Dense autoencoder: `widths` lists every layer width including input and
// output, e.g. {784, 128, 32, 128, 784}; widths must mirror around the
// bottleneck. Hidden units use ReLU, the reconstruction layer uses sigmoid.
//
// Conv autoencoder: `channels` is the encoder channel progression, e.g.
// {8, 4, 2}. Encoder = three 3x3 same-padding conv layers, with 2x2 max
// pooling after the first two; decoder mirrors with nearest-neighbour
// upsampling and a sigmoid reconstruction conv.
//
// Classifier: `channels` lists the two conv layer channel counts, e.g.
// {8, 16}; two 3x3 conv + 2x2 max-pool stages, optional hidden dense
// layers (`widths`, ReLU), then a dense softmax layer over `num_classes`.
//
// LSTM language model: one-hot tokens over `vocab`, `lstm_units` hidden
// units per layer, fixed `history` input length, dense softmax over the
// vocabulary.
struct ModelArch {
  ArchKind kind = ArchKind::kDenseAutoencoder;

  std::vector<int> widths;    // dense autoencoder
  std::vector<int> channels;  // conv autoencoder / classifier
  int kernel = 3;             // conv kernel side (odd, same padding)

  int input_rows = 28;
  int input_cols = 28;
  int num_classes = 10;

  int vocab = 0;    // lstm-lm
  int history = 0;  // lstm-lm input length
  std::vector<int> lstm_units;

  static ModelArch dense_autoencoder(std::vector<int> widths);
  static ModelArch conv_autoencoder(std::vector<int> channels = {8, 4, 2});
  static ModelArch classifier(std::vector<int> channels = {8, 16}, int num_classes = 10,
                              std::vector<int> hidden = {64});
  static ModelArch lstm_lm(int vocab, int history, std::vector<int> units = {64});

  int input_size() const;
  int output_size() const;

  // Throws ArchError when internally inconsistent.
  void validate() const;
};

}  // namespace dpad::nn
