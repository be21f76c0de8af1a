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

#include "dpad/nn/arch.hpp"

#include "dpad/error.hpp"

namespace dpad::nn {

std::string to_string(ArchKind k) {
  switch (k) {
    case ArchKind::kDenseAutoencoder: return "dense-autoencoder";
    case ArchKind::kConvAutoencoder: return "conv-autoencoder";
    case ArchKind::kLstmLm: return "lstm-lm";
    case ArchKind::kClassifier: return "classifier";
  }
  return "?";
}

std::string to_string(LossKind k) {
  return k == LossKind::kReconstructionMse ? "reconstruction-mse" : "cross-entropy";
}

ArchKind arch_kind_from_string(const std::string& s) {
  if (s == "dense-autoencoder") return ArchKind::kDenseAutoencoder;
  if (s == "conv-autoencoder") return ArchKind::kConvAutoencoder;
  if (s == "lstm-lm") return ArchKind::kLstmLm;
  if (s == "classifier") return ArchKind::kClassifier;
  throw InputError("unknown arch kind: " + s);
}

LossKind loss_kind_from_string(const std::string& s) {
  if (s == "reconstruction-mse") return LossKind::kReconstructionMse;
  if (s == "cross-entropy") return LossKind::kCrossEntropy;
  throw InputError("unknown loss kind: " + s);
}

ModelArch ModelArch::dense_autoencoder(std::vector<int> widths) {
  ModelArch a;
  a.kind = ArchKind::kDenseAutoencoder;
  a.widths = std::move(widths);
  a.validate();
  return a;
}

ModelArch ModelArch::conv_autoencoder(std::vector<int> channels) {
  ModelArch a;
  a.kind = ArchKind::kConvAutoencoder;
  a.channels = std::move(channels);
  a.validate();
  return a;
}

ModelArch ModelArch::classifier(std::vector<int> channels, int num_classes,
                                std::vector<int> hidden) {
  ModelArch a;
  a.kind = ArchKind::kClassifier;
  a.channels = std::move(channels);
  a.num_classes = num_classes;
  a.widths = std::move(hidden);
  a.validate();
  return a;
}

ModelArch ModelArch::lstm_lm(int vocab, int history, std::vector<int> units) {
  ModelArch a;
  a.kind = ArchKind::kLstmLm;
  a.vocab = vocab;
  a.history = history;
  a.lstm_units = std::move(units);
  a.validate();
  return a;
}

int ModelArch::input_size() const {
  switch (kind) {
    case ArchKind::kDenseAutoencoder: return widths.front();
    case ArchKind::kConvAutoencoder:
    case ArchKind::kClassifier: return input_rows * input_cols;
    case ArchKind::kLstmLm: return history;
  }
  return 0;
}

int ModelArch::output_size() const {
  switch (kind) {
    case ArchKind::kDenseAutoencoder: return widths.back();
    case ArchKind::kConvAutoencoder: return input_rows * input_cols;
    case ArchKind::kClassifier: return num_classes;
    case ArchKind::kLstmLm: return vocab;
  }
  return 0;
}

void ModelArch::validate() const {
  switch (kind) {
    case ArchKind::kDenseAutoencoder: {
      if (widths.size() < 3) throw ArchError("dense autoencoder needs at least 3 widths");
      for (int w : widths)
        if (w <= 0) throw ArchError("dense autoencoder: non-positive width");
      const std::size_t n = widths.size();
      for (std::size_t i = 0; i < n; ++i)
        if (widths[i] != widths[n - 1 - i])
          throw ArchError("dense autoencoder: encoder/decoder widths do not mirror");
      break;
    }
    case ArchKind::kConvAutoencoder: {
      if (channels.size() != 3) throw ArchError("conv autoencoder needs 3 encoder channel counts");
      for (int c : channels)
        if (c <= 0) throw ArchError("conv autoencoder: non-positive channel count");
      if (kernel <= 0 || kernel % 2 == 0) throw ArchError("conv kernel must be odd");
      if (input_rows % 4 != 0 || input_cols % 4 != 0)
        throw ArchError("conv autoencoder input sides must divide by 4");
      break;
    }
    case ArchKind::kClassifier: {
      if (channels.size() != 2) throw ArchError("classifier needs 2 conv channel counts");
      for (int c : channels)
        if (c <= 0) throw ArchError("classifier: non-positive channel count");
      for (int w : widths)
        if (w <= 0) throw ArchError("classifier: non-positive hidden width");
      if (kernel <= 0 || kernel % 2 == 0) throw ArchError("conv kernel must be odd");
      if (num_classes < 2) throw ArchError("classifier needs at least 2 classes");
      if (input_rows % 4 != 0 || input_cols % 4 != 0)
        throw ArchError("classifier input sides must divide by 4");
      break;
    }
    case ArchKind::kLstmLm: {
      if (vocab < 2) throw ArchError("lstm-lm vocabulary must have at least 2 tokens");
      if (history < 1) throw ArchError("lstm-lm history length must be positive");
      if (lstm_units.empty()) throw ArchError("lstm-lm needs at least one layer");
      for (int u : lstm_units)
        if (u <= 0) throw ArchError("lstm-lm: non-positive unit count");
      break;
    }
  }
}

}  // namespace dpad::nn
