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

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dpad/nn/sample.hpp"

namespace dpad::data {

enum class Provenance : std::uint8_t {
  kNormal = 0,
  kOutlier = 1,
  kPoisoned = 2,
};

// Images with labels and per-sample provenance flags. Pixels are raw 8-bit
// intensities; models normalize to [0,1] at input time.
struct ImageDataset {
  int rows = 28;
  int cols = 28;
  std::vector<std::uint8_t> pixels;  // size() * rows * cols
  std::vector<std::uint8_t> labels;
  std::vector<Provenance> flags;

  struct Meta {
    std::string source;
    double ratio = 0.0;  // r_o or r_p where applicable
    std::uint64_t seed = 0;
  } meta;

  std::size_t size() const { return labels.size(); }
  std::size_t pixels_per_image() const {
    return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  }

  std::span<const std::uint8_t> image(std::size_t i) const {
    return {pixels.data() + i * pixels_per_image(), pixels_per_image()};
  }
  std::span<std::uint8_t> image(std::size_t i) {
    return {pixels.data() + i * pixels_per_image(), pixels_per_image()};
  }

  void append_from(const ImageDataset& src, std::size_t i, Provenance flag);
  std::size_t count_flag(Provenance flag) const;

  // Pixel values scaled into [0,1], label carried over.
  nn::Sample to_sample(std::size_t i) const;
};

std::vector<nn::Sample> to_samples(const ImageDataset& ds);

// Provenance sidecar (one integer per line, aligned with the dataset).
void write_flags(const ImageDataset& ds, const std::string& path);
void read_flags(ImageDataset& ds, const std::string& path);

}  // namespace dpad::data
