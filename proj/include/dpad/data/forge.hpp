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

#include <array>
#include <cstdint>
#include <string>
#include <utility>

#include "dpad/data/image_dataset.hpp"

namespace dpad::data {

// ---------------------------------------------------------------------------
// IDX container IO (big-endian, magic 0x0803 images / 0x0801 labels)
// ---------------------------------------------------------------------------

// Reads an IDX image file, and a companion IDX label file when given.
ImageDataset load_idx(const std::string& images_path, const std::string& labels_path = "");

// Writes the dataset back out in the same layout; write then load is the
// identity on pixels and labels.
void write_idx(const ImageDataset& ds, const std::string& images_path,
               const std::string& labels_path = "");

// ---------------------------------------------------------------------------
// dataset builders
// ---------------------------------------------------------------------------

// round-half-up of total * ratio; the convention every builder uses.
std::size_t ratio_count(std::size_t total, double ratio);

// Contaminated training mix: exactly ratio_count(total, r_o) samples drawn
// from `outlier_src` (flagged outlier) and the rest from `normal`, both
// without replacement, order shuffled by seed.
ImageDataset build_outlier_mix(const ImageDataset& normal, const ImageDataset& outlier_src,
                               double r_o, std::size_t total, std::uint64_t seed);

// Novelty test set: all of `normal_test` plus all of `outlier_test`,
// flagged by origin.
ImageDataset build_nd_test(const ImageDataset& normal_test, const ImageDataset& outlier_test);

// ---------------------------------------------------------------------------
// backdoor poisoning
// ---------------------------------------------------------------------------

// Trigger: invert (v -> 255 - v) exactly four pixels inside the bottom-right
// 6x6 region; poisoned labels move to (i + 1) mod 10.
struct PoisonSpec {
  std::array<std::pair<int, int>, 4> coords = {{{24, 24}, {24, 26}, {26, 24}, {26, 26}}};

  void validate(int rows, int cols) const;
};

// Applies the trigger to one 28x28 image; involution.
std::vector<std::uint8_t> apply_trigger(std::span<const std::uint8_t> image,
                                        const PoisonSpec& spec, int rows = 28, int cols = 28);

// Triggers and relabels ratio_count(N, r_p) samples, chosen by seed.
// r_p = 1 poisons every sample (the fully poisoned test set).
ImageDataset poison(const ImageDataset& ds, double r_p, const PoisonSpec& spec,
                    std::uint64_t seed);

// ---------------------------------------------------------------------------
// self-contained synthetic image sources
// ---------------------------------------------------------------------------

// Ten-class seven-segment style digit images with small jitter; the
// low-variance "normal" population. Labels are the class ids.
ImageDataset synth_digits(std::size_t n, std::uint64_t seed);

// Random thick-stroke glyphs, each sample near-unique; stands in for an
// external letter dataset as the outlier source.
ImageDataset synth_glyphs(std::size_t n, std::uint64_t seed);

}  // namespace dpad::data
