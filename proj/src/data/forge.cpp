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

#include "dpad/data/forge.hpp"

#include <algorithm>
#include <cmath>

#include "dpad/error.hpp"
#include "dpad/rng.hpp"

namespace dpad::data {

std::size_t ratio_count(std::size_t total, double ratio) {
  if (ratio < 0.0 || ratio > 1.0) throw InputError("ratio must lie in [0, 1]");
  return static_cast<std::size_t>(std::floor(static_cast<double>(total) * ratio + 0.5));
}

ImageDataset build_outlier_mix(const ImageDataset& normal, const ImageDataset& outlier_src,
                               double r_o, std::size_t total, std::uint64_t seed) {
  const std::size_t n_out = ratio_count(total, r_o);
  const std::size_t n_norm = total - n_out;
  if (outlier_src.size() < n_out)
    throw InputError("outlier source holds " + std::to_string(outlier_src.size()) +
                     " samples, need " + std::to_string(n_out));
  if (normal.size() < n_norm)
    throw InputError("normal source holds " + std::to_string(normal.size()) +
                     " samples, need " + std::to_string(n_norm));
  if (normal.rows != outlier_src.rows || normal.cols != outlier_src.cols)
    throw InputError("source image dimensions differ");

  Rng rng(mix_seed(seed, 0x4d49584dULL));
  const auto norm_idx = rng.sample_without_replacement(normal.size(), n_norm);
  const auto out_idx = rng.sample_without_replacement(outlier_src.size(), n_out);

  ImageDataset mix;
  mix.rows = normal.rows;
  mix.cols = normal.cols;
  mix.meta = {"outlier-mix", r_o, seed};
  mix.pixels.reserve(total * mix.pixels_per_image());
  for (std::size_t i : norm_idx) mix.append_from(normal, i, Provenance::kNormal);
  for (std::size_t i : out_idx) mix.append_from(outlier_src, i, Provenance::kOutlier);

  // Shuffle all three aligned arrays through one permutation.
  std::vector<std::size_t> perm(total);
  for (std::size_t i = 0; i < total; ++i) perm[i] = i;
  rng.shuffle(perm);
  ImageDataset shuffled;
  shuffled.rows = mix.rows;
  shuffled.cols = mix.cols;
  shuffled.meta = mix.meta;
  shuffled.pixels.reserve(mix.pixels.size());
  for (std::size_t i : perm) shuffled.append_from(mix, i, mix.flags[i]);
  return shuffled;
}

ImageDataset build_nd_test(const ImageDataset& normal_test, const ImageDataset& outlier_test) {
  if (outlier_test.size() > 0 &&
      (normal_test.rows != outlier_test.rows || normal_test.cols != outlier_test.cols))
    throw InputError("test source image dimensions differ");
  ImageDataset out;
  out.rows = normal_test.rows;
  out.cols = normal_test.cols;
  out.meta = {"nd-test", 0.0, 0};
  for (std::size_t i = 0; i < normal_test.size(); ++i)
    out.append_from(normal_test, i, Provenance::kNormal);
  for (std::size_t i = 0; i < outlier_test.size(); ++i)
    out.append_from(outlier_test, i, Provenance::kOutlier);
  return out;
}

void PoisonSpec::validate(int rows, int cols) const {
  for (const auto& [r, c] : coords) {
    if (r < rows - 6 || r >= rows || c < cols - 6 || c >= cols)
      throw InputError("trigger pixel (" + std::to_string(r) + "," + std::to_string(c) +
                       ") lies outside the bottom-right 6x6 region");
  }
}

std::vector<std::uint8_t> apply_trigger(std::span<const std::uint8_t> image,
                                        const PoisonSpec& spec, int rows, int cols) {
  if (image.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols))
    throw InputError("apply_trigger expects a " + std::to_string(rows) + "x" +
                     std::to_string(cols) + " image");
  spec.validate(rows, cols);
  std::vector<std::uint8_t> out(image.begin(), image.end());
  for (const auto& [r, c] : spec.coords) {
    auto& v = out[static_cast<std::size_t>(r) * cols + c];
    v = static_cast<std::uint8_t>(255 - v);
  }
  return out;
}

ImageDataset poison(const ImageDataset& ds, double r_p, const PoisonSpec& spec,
                    std::uint64_t seed) {
  spec.validate(ds.rows, ds.cols);
  const std::size_t n_poison = ratio_count(ds.size(), r_p);
  Rng rng(mix_seed(seed, 0xb4cd00ULL));
  const auto chosen = rng.sample_without_replacement(ds.size(), n_poison);
  std::vector<std::uint8_t> is_poisoned(ds.size(), 0);
  for (std::size_t i : chosen) is_poisoned[i] = 1;

  ImageDataset out = ds;
  out.meta = {"poisoned", r_p, seed};
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!is_poisoned[i]) continue;
    const auto triggered = apply_trigger(out.image(i), spec, out.rows, out.cols);
    std::copy(triggered.begin(), triggered.end(), out.image(i).begin());
    out.labels[i] = static_cast<std::uint8_t>((out.labels[i] + 1) % 10);
    out.flags[i] = Provenance::kPoisoned;
  }
  return out;
}

// ---------------------------------------------------------------------------
// synthetic image sources
// ---------------------------------------------------------------------------

namespace {

void stamp(std::span<std::uint8_t> img, int rows, int cols, int r, int c, int thick,
           int value) {
  for (int dr = 0; dr < thick; ++dr) {
    for (int dc = 0; dc < thick; ++dc) {
      const int rr = r + dr, cc = c + dc;
      if (rr < 0 || rr >= rows || cc < 0 || cc >= cols) continue;
      auto& px = img[static_cast<std::size_t>(rr) * cols + cc];
      px = static_cast<std::uint8_t>(std::max<int>(px, value));
    }
  }
}

void draw_line(std::span<std::uint8_t> img, int rows, int cols, int r0, int c0, int r1,
               int c1, int thick, int value) {
  const int steps = std::max(std::abs(r1 - r0), std::abs(c1 - c0)) + 1;
  for (int i = 0; i < steps; ++i) {
    const double t = steps == 1 ? 0.0 : static_cast<double>(i) / (steps - 1);
    const int r = static_cast<int>(std::lround(r0 + t * (r1 - r0)));
    const int c = static_cast<int>(std::lround(c0 + t * (c1 - c0)));
    stamp(img, rows, cols, r, c, thick, value);
  }
}

// Seven-segment layout on a 28x28 canvas.
//   A top bar, G middle, D bottom; F/B upper verticals, E/C lower verticals.
struct SegmentBox {
  int top = 5, mid = 13, bot = 21;
  int left = 8, right = 19;
  int c0 = 9, c1 = 18;
};

struct DigitStyle {
  int dr = 0, dc = 0;     // translation
  int thick = 2;          // stroke width
  double shear = 0.0;     // italic slant, columns shift with the row
  int value = 220;        // stroke intensity
  int jitter = 0;         // endpoint wobble in pixels
};

void draw_digit(std::span<std::uint8_t> img, int rows, int cols, unsigned mask,
                const DigitStyle& st, Rng& rng) {
  const SegmentBox b;
  auto wob = [&]() {
    return st.jitter == 0
               ? 0
               : static_cast<int>(rng.uniform_below(2 * st.jitter + 1)) - st.jitter;
  };
  auto place = [&](int r, int c) {
    const int sheared = c + static_cast<int>(std::lround(st.shear * (r - 14)));
    return std::pair<int, int>{r + st.dr + wob(), sheared + st.dc + wob()};
  };
  auto seg = [&](int r0, int c0, int r1, int c1, bool on) {
    if (!on) return;
    const auto [ar, ac] = place(r0, c0);
    const auto [br, bc] = place(r1, c1);
    draw_line(img, rows, cols, ar, ac, br, bc, st.thick, st.value);
  };
  seg(b.top, b.c0, b.top, b.c1, mask & 0x01);                    // A
  seg(b.top + 1, b.right, b.mid - 1, b.right, mask & 0x02);      // B
  seg(b.mid + 1, b.right, b.bot - 1, b.right, mask & 0x04);      // C
  seg(b.bot, b.c0, b.bot, b.c1, mask & 0x08);                    // D
  seg(b.mid + 1, b.left, b.bot - 1, b.left, mask & 0x10);        // E
  seg(b.top + 1, b.left, b.mid - 1, b.left, mask & 0x20);        // F
  seg(b.mid, b.c0, b.mid, b.c1, mask & 0x40);                    // G
}

// A..G bit masks per digit.
constexpr unsigned kDigitSegments[10] = {
    0x3F,  // 0: ABCDEF
    0x06,  // 1: BC
    0x5B,  // 2: ABDEG
    0x4F,  // 3: ABCDG
    0x66,  // 4: BCFG
    0x6D,  // 5: ACDFG
    0x7D,  // 6: ACDEFG
    0x07,  // 7: ABC
    0x7F,  // 8: all
    0x6F,  // 9: ABCDFG
};

void speckle(std::span<std::uint8_t> img, Rng& rng, int count, int amplitude) {
  for (int k = 0; k < count; ++k) {
    const auto px = rng.uniform_below(img.size());
    const int delta = static_cast<int>(rng.uniform_below(amplitude));
    img[px] = static_cast<std::uint8_t>(std::min(255, img[px] + delta));
  }
}

}  // namespace

ImageDataset synth_digits(std::size_t n, std::uint64_t seed) {
  ImageDataset ds;
  ds.meta = {"synth-digits", 0.0, seed};
  ds.pixels.assign(n * ds.pixels_per_image(), 0);
  ds.labels.resize(n);
  ds.flags.assign(n, Provenance::kNormal);

  Rng rng(mix_seed(seed, 0xd16175ULL));
  for (std::size_t i = 0; i < n; ++i) {
    const int digit = static_cast<int>(rng.uniform_below(10));
    DigitStyle st;
    st.dr = static_cast<int>(rng.uniform_below(5)) - 2;
    st.dc = static_cast<int>(rng.uniform_below(5)) - 2;
    st.thick = 2;
    st.shear = -0.08 + 0.16 * rng.uniform01();
    st.value = 190 + static_cast<int>(rng.uniform_below(66));
    auto img = ds.image(i);
    draw_digit(img, ds.rows, ds.cols, kDigitSegments[digit], st, rng);
    speckle(img, rng, 15, 20);
    ds.labels[i] = static_cast<std::uint8_t>(digit);
  }
  return ds;
}

namespace {

// Letter motifs drawn with thick strokes on the digit box, so the outlier
// population carries class structure of its own (rare letter shapes) with
// pixel statistics comparable to the digits.
struct Stroke {
  int r0, c0, r1, c1;
};

const std::vector<std::vector<Stroke>>& letter_motifs() {
  // box rows 5..21, cols 8..19, middle row 13, centre column 14
  static const std::vector<std::vector<Stroke>> motifs = {
      {{5, 8, 21, 8}, {5, 19, 21, 19}, {5, 8, 5, 19}, {13, 8, 13, 19}},    // A
      {{5, 8, 5, 19}, {21, 8, 21, 19}, {5, 8, 21, 8}},                     // C
      {{5, 8, 5, 19}, {13, 8, 13, 16}, {21, 8, 21, 19}, {5, 8, 21, 8}},    // E
      {{5, 8, 5, 19}, {13, 8, 13, 16}, {5, 8, 21, 8}},                     // F
      {{5, 8, 21, 8}, {5, 19, 21, 19}, {13, 8, 13, 19}},                   // H
      {{5, 19, 21, 19}, {21, 8, 21, 19}, {17, 8, 21, 8}},                  // J
      {{5, 8, 21, 8}, {21, 8, 21, 19}},                                    // L
      {{5, 8, 21, 8}, {5, 8, 5, 19}, {13, 8, 13, 19}, {5, 19, 13, 19}},    // P
      {{5, 8, 5, 19}, {5, 14, 21, 14}},                                    // T
      {{5, 8, 21, 8}, {5, 19, 21, 19}, {21, 8, 21, 19}},                   // U
      {{5, 8, 13, 14}, {5, 19, 13, 14}, {13, 14, 21, 14}},                 // Y
      {{5, 8, 5, 19}, {5, 19, 21, 8}, {21, 8, 21, 19}},                    // Z
  };
  return motifs;
}

}  // namespace

ImageDataset synth_glyphs(std::size_t n, std::uint64_t seed) {
  ImageDataset ds;
  ds.meta = {"synth-glyphs", 0.0, seed};
  ds.pixels.assign(n * ds.pixels_per_image(), 0);
  ds.labels.assign(n, 0);
  ds.flags.assign(n, Provenance::kNormal);

  const auto& motifs = letter_motifs();
  Rng rng(mix_seed(seed, 0x617970ULL));
  for (std::size_t i = 0; i < n; ++i) {
    auto img = ds.image(i);
    const auto motif = rng.uniform_below(motifs.size());
    // narrow per-motif jitter: each letter forms a tight subpopulation
    const int dr = static_cast<int>(rng.uniform_below(3)) - 1;
    const int dc = static_cast<int>(rng.uniform_below(3)) - 1;
    const double shear = -0.03 + 0.06 * rng.uniform01();
    const int value = 215 + static_cast<int>(rng.uniform_below(41));
    for (const Stroke& s : motifs[motif]) {
      const int sc0 = s.c0 + static_cast<int>(std::lround(shear * (s.r0 - 14)));
      const int sc1 = s.c1 + static_cast<int>(std::lround(shear * (s.r1 - 14)));
      draw_line(img, ds.rows, ds.cols, s.r0 + dr, sc0 + dc, s.r1 + dr, sc1 + dc, 3, value);
    }
    speckle(img, rng, 8, 12);
    ds.labels[i] = static_cast<std::uint8_t>(motif);
  }
  return ds;
}

}  // namespace dpad::data
