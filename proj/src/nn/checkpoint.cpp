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

#include "dpad/nn/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include <json.hpp>

#include "dpad/error.hpp"

namespace dpad::nn {

namespace {

constexpr char kMagic[8] = {'D', 'P', 'A', 'D', 'C', 'K', 'P', '1'};

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint32_t get_u32(std::istream& is, std::size_t offset) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4))
    throw FormatError("checkpoint truncated at byte " + std::to_string(offset));
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::istream& is, std::size_t offset) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8))
    throw FormatError("checkpoint truncated at byte " + std::to_string(offset));
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

nlohmann::json arch_to_json(const ModelArch& a) {
  nlohmann::json j;
  j["kind"] = to_string(a.kind);
  j["widths"] = a.widths;
  j["channels"] = a.channels;
  j["kernel"] = a.kernel;
  j["input_rows"] = a.input_rows;
  j["input_cols"] = a.input_cols;
  j["num_classes"] = a.num_classes;
  j["vocab"] = a.vocab;
  j["history"] = a.history;
  j["lstm_units"] = a.lstm_units;
  return j;
}

ModelArch arch_from_json(const nlohmann::json& j) {
  ModelArch a;
  a.kind = arch_kind_from_string(j.at("kind").get<std::string>());
  a.widths = j.at("widths").get<std::vector<int>>();
  a.channels = j.at("channels").get<std::vector<int>>();
  a.kernel = j.at("kernel").get<int>();
  a.input_rows = j.at("input_rows").get<int>();
  a.input_cols = j.at("input_cols").get<int>();
  a.num_classes = j.at("num_classes").get<int>();
  a.vocab = j.at("vocab").get<int>();
  a.history = j.at("history").get<int>();
  a.lstm_units = j.at("lstm_units").get<std::vector<int>>();
  a.validate();
  return a;
}

}  // namespace

void save_checkpoint(const Model& model, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("cannot open '" + path + "' for writing");

  nlohmann::json header;
  header["arch"] = arch_to_json(model.arch());
  std::vector<std::string> names;
  for (std::size_t i = 0; i < model.tensor_count(); ++i) names.push_back(model.name(i));
  header["tensors"] = names;
  const std::string htext = header.dump();

  os.write(kMagic, 8);
  put_u32(os, static_cast<std::uint32_t>(htext.size()));
  os.write(htext.data(), static_cast<std::streamsize>(htext.size()));

  const std::vector<double> flat = model.flatten();
  put_u64(os, flat.size());
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (double v : flat) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
    hash = fnv1a64(b, 8, hash);
  }
  put_u64(os, hash);
  if (!os) throw FormatError("write failure on '" + path + "'");
}

Model load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("cannot open '" + path + "'");

  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0)
    throw FormatError("bad checkpoint magic at byte 0");

  const std::uint32_t hlen = get_u32(is, 8);
  std::string htext(hlen, '\0');
  if (!is.read(htext.data(), hlen))
    throw FormatError("checkpoint truncated at byte 12");

  ModelArch arch;
  try {
    const nlohmann::json header = nlohmann::json::parse(htext);
    arch = arch_from_json(header.at("arch"));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad checkpoint header: ") + e.what());
  }

  std::size_t offset = 12 + hlen;
  const std::uint64_t count = get_u64(is, offset);
  offset += 8;

  Model model = build_model(arch, 0);
  if (count != model.param_count())
    throw FormatError("checkpoint parameter count " + std::to_string(count) +
                      " does not match arch (" + std::to_string(model.param_count()) + ")");

  std::vector<double> flat(count);
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (std::uint64_t i = 0; i < count; ++i) {
    unsigned char b[8];
    if (!is.read(reinterpret_cast<char*>(b), 8))
      throw FormatError("checkpoint truncated at byte " + std::to_string(offset + 8 * i));
    std::uint64_t bits = 0;
    for (int k = 0; k < 8; ++k) bits |= static_cast<std::uint64_t>(b[k]) << (8 * k);
    flat[i] = std::bit_cast<double>(bits);
    hash = fnv1a64(b, 8, hash);
  }
  offset += 8 * count;
  const std::uint64_t stored = get_u64(is, offset);
  if (stored != hash)
    throw FormatError("checkpoint content hash mismatch at byte " + std::to_string(offset));

  model.unflatten(flat);
  return model;
}

}  // namespace dpad::nn
