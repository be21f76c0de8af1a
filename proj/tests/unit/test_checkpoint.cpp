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

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "dpad/error.hpp"
#include "dpad/nn/checkpoint.hpp"

using namespace dpad;

namespace {

std::string temp_path(const char* name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("checkpoint round trip preserves arch and parameters bit-exactly") {
  const auto arch = nn::ModelArch::lstm_lm(11, 5, {9, 7});
  const auto m = nn::build_model(arch, 42);
  const std::string path = temp_path("dpad_ckpt_roundtrip.bin");
  nn::save_checkpoint(m, path);
  const auto loaded = nn::load_checkpoint(path);
  CHECK(loaded.arch().kind == arch.kind);
  CHECK(loaded.arch().vocab == 11);
  CHECK(loaded.arch().lstm_units == std::vector<int>{9, 7});
  CHECK(loaded.flatten() == m.flatten());
  CHECK(loaded.content_hash() == m.content_hash());
  std::remove(path.c_str());
}

TEST_CASE("corrupted checkpoint payload is rejected by the content hash") {
  const auto m = nn::build_model(nn::ModelArch::dense_autoencoder({8, 4, 8}), 2);
  const std::string path = temp_path("dpad_ckpt_corrupt.bin");
  nn::save_checkpoint(m, path);
  {
    // flip a byte inside the parameter payload (before the trailing hash)
    const auto size = std::filesystem::file_size(path);
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekg(static_cast<std::streamoff>(size) - 16);
    char byte;
    f.read(&byte, 1);
    byte = static_cast<char>(byte ^ 0x5a);
    f.seekp(static_cast<std::streamoff>(size) - 16);
    f.write(&byte, 1);
  }
  CHECK_THROWS_AS(nn::load_checkpoint(path), FormatError);
  std::remove(path.c_str());
}

TEST_CASE("a corrupted header is a format error, not a raw json error") {
  const auto m = nn::build_model(nn::ModelArch::dense_autoencoder({8, 4, 8}), 2);
  const std::string path = temp_path("dpad_ckpt_header.bin");
  nn::save_checkpoint(m, path);
  {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(64);
    const char junk = 0x5a;
    f.write(&junk, 1);
  }
  CHECK_THROWS_AS(nn::load_checkpoint(path), FormatError);
  std::remove(path.c_str());
}

TEST_CASE("bad magic is rejected with the byte offset") {
  const std::string path = temp_path("dpad_ckpt_magic.bin");
  std::ofstream(path, std::ios::binary) << "NOTACKPT blah blah";
  try {
    nn::load_checkpoint(path);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("byte 0") != std::string::npos);
  }
  std::remove(path.c_str());
}
