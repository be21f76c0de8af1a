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

#include "dpad/data/image_dataset.hpp"

#include <fstream>

#include "dpad/error.hpp"

namespace dpad::data {

void ImageDataset::append_from(const ImageDataset& src, std::size_t i, Provenance flag) {
  if (src.rows != rows || src.cols != cols)
    throw InputError("append_from: image dimensions differ");
  const auto img = src.image(i);
  pixels.insert(pixels.end(), img.begin(), img.end());
  labels.push_back(src.labels[i]);
  flags.push_back(flag);
}

std::size_t ImageDataset::count_flag(Provenance flag) const {
  std::size_t n = 0;
  for (Provenance f : flags)
    if (f == flag) ++n;
  return n;
}

nn::Sample ImageDataset::to_sample(std::size_t i) const {
  nn::Sample s;
  const auto img = image(i);
  s.input.resize(img.size());
  for (std::size_t k = 0; k < img.size(); ++k)
    s.input[k] = static_cast<double>(img[k]) / 255.0;
  s.label = labels[i];
  return s;
}

std::vector<nn::Sample> to_samples(const ImageDataset& ds) {
  std::vector<nn::Sample> out;
  out.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) out.push_back(ds.to_sample(i));
  return out;
}

void write_flags(const ImageDataset& ds, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw FormatError("cannot open '" + path + "' for writing");
  for (Provenance f : ds.flags) os << static_cast<int>(f) << '\n';
}

void read_flags(ImageDataset& ds, const std::string& path) {
  std::ifstream is(path);
  if (!is) throw FormatError("cannot open '" + path + "'");
  ds.flags.clear();
  int v;
  while (is >> v) {
    if (v < 0 || v > 2) throw FormatError("flag value out of range in '" + path + "'");
    ds.flags.push_back(static_cast<Provenance>(v));
  }
  if (ds.flags.size() != ds.size())
    throw FormatError("flag count does not match dataset size in '" + path + "'");
}

}  // namespace dpad::data
