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

#include <cstdint>
#include <fstream>
#include <string>

#include "dpad/data/forge.hpp"
#include "dpad/error.hpp"

namespace dpad::data {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::uint32_t get_be32(std::istream& is, std::size_t offset, const std::string& path) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4))
    throw FormatError("'" + path + "': truncated at byte " + std::to_string(offset));
  return (static_cast<std::uint32_t>(b[0]) << 24) | (static_cast<std::uint32_t>(b[1]) << 16) |
         (static_cast<std::uint32_t>(b[2]) << 8) | static_cast<std::uint32_t>(b[3]);
}

void put_be32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                        static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

}  // namespace

ImageDataset load_idx(const std::string& images_path, const std::string& labels_path) {
  std::ifstream is(images_path, std::ios::binary);
  if (!is) throw FormatError("cannot open '" + images_path + "'");

  const std::uint32_t magic = get_be32(is, 0, images_path);
  if (magic != kImageMagic)
    throw FormatError("'" + images_path + "': bad image magic at byte 0 (got 0x" +
                      [&] {
                        char buf[16];
                        std::snprintf(buf, sizeof(buf), "%08x", magic);
                        return std::string(buf);
                      }() +
                      ")");
  const std::uint32_t count = get_be32(is, 4, images_path);
  const std::uint32_t rows = get_be32(is, 8, images_path);
  const std::uint32_t cols = get_be32(is, 12, images_path);
  if (rows == 0 || cols == 0 || rows > 4096 || cols > 4096)
    throw FormatError("'" + images_path + "': implausible dimensions at byte 8");

  ImageDataset ds;
  ds.rows = static_cast<int>(rows);
  ds.cols = static_cast<int>(cols);
  ds.meta.source = images_path;
  const std::size_t payload = static_cast<std::size_t>(count) * rows * cols;
  ds.pixels.resize(payload);
  if (!is.read(reinterpret_cast<char*>(ds.pixels.data()),
               static_cast<std::streamsize>(payload))) {
    const std::size_t got = static_cast<std::size_t>(is.gcount());
    throw FormatError("'" + images_path + "': truncated payload at byte " +
                      std::to_string(16 + got));
  }
  ds.labels.assign(count, 0);
  ds.flags.assign(count, Provenance::kNormal);

  if (!labels_path.empty()) {
    std::ifstream ls(labels_path, std::ios::binary);
    if (!ls) throw FormatError("cannot open '" + labels_path + "'");
    const std::uint32_t lmagic = get_be32(ls, 0, labels_path);
    if (lmagic != kLabelMagic)
      throw FormatError("'" + labels_path + "': bad label magic at byte 0");
    const std::uint32_t lcount = get_be32(ls, 4, labels_path);
    if (lcount != count)
      throw FormatError("'" + labels_path + "': label count " + std::to_string(lcount) +
                        " does not match image count " + std::to_string(count) +
                        " (byte 4)");
    if (!ls.read(reinterpret_cast<char*>(ds.labels.data()), count)) {
      const std::size_t got = static_cast<std::size_t>(ls.gcount());
      throw FormatError("'" + labels_path + "': truncated payload at byte " +
                        std::to_string(8 + got));
    }
  }
  return ds;
}

void write_idx(const ImageDataset& ds, const std::string& images_path,
               const std::string& labels_path) {
  std::ofstream os(images_path, std::ios::binary);
  if (!os) throw FormatError("cannot open '" + images_path + "' for writing");
  put_be32(os, kImageMagic);
  put_be32(os, static_cast<std::uint32_t>(ds.size()));
  put_be32(os, static_cast<std::uint32_t>(ds.rows));
  put_be32(os, static_cast<std::uint32_t>(ds.cols));
  os.write(reinterpret_cast<const char*>(ds.pixels.data()),
           static_cast<std::streamsize>(ds.pixels.size()));
  if (!os) throw FormatError("write failure on '" + images_path + "'");

  if (!labels_path.empty()) {
    std::ofstream ls(labels_path, std::ios::binary);
    if (!ls) throw FormatError("cannot open '" + labels_path + "' for writing");
    put_be32(ls, kLabelMagic);
    put_be32(ls, static_cast<std::uint32_t>(ds.size()));
    ls.write(reinterpret_cast<const char*>(ds.labels.data()),
             static_cast<std::streamsize>(ds.labels.size()));
    if (!ls) throw FormatError("write failure on '" + labels_path + "'");
  }
}

}  // namespace dpad::data
