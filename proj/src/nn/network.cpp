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

#include "dpad/nn/network.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "dpad/error.hpp"

namespace dpad::nn {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

inline void zero(std::vector<double>& v, std::size_t n) {
  v.assign(n, 0.0);
}

// ---------------------------------------------------------------------------
// dense kernels
// ---------------------------------------------------------------------------

// y = W x + b, W row-major {out, in}
void affine_forward(const double* W, const double* b, const double* x,
                    std::size_t out, std::size_t in, double* y) {
  for (std::size_t o = 0; o < out; ++o) {
    const double* row = W + o * in;
    double acc = b[o];
    for (std::size_t j = 0; j < in; ++j) acc += row[j] * x[j];
    y[o] = acc;
  }
}

// Accumulates dW += dy (x) x, db += dy and (optionally) dx += W^T dy.
// Fused over each weight row; rows with zero upstream gradient are skipped.
void affine_backward(const double* W, const double* x, const double* dy,
                     std::size_t out, std::size_t in, double* dW, double* db,
                     double* dx) {
  for (std::size_t o = 0; o < out; ++o) {
    const double g = dy[o];
    db[o] += g;
    if (g == 0.0) continue;
    const double* wrow = W + o * in;
    double* dwrow = dW + o * in;
    if (dx) {
      for (std::size_t j = 0; j < in; ++j) {
        dwrow[j] += g * x[j];
        dx[j] += g * wrow[j];
      }
    } else {
      for (std::size_t j = 0; j < in; ++j) dwrow[j] += g * x[j];
    }
  }
}

// ---------------------------------------------------------------------------
// conv / pooling kernels (stride 1, same zero padding, square kernel)
// ---------------------------------------------------------------------------

struct ConvDims {
  int cin, cout, h, w, k;
};

void conv_forward(const double* W, const double* b, const double* in,
                  const ConvDims& d, double* out) {
  const int pad = d.k / 2;
  for (int co = 0; co < d.cout; ++co) {
    double* oplane = out + static_cast<std::size_t>(co) * d.h * d.w;
    for (int y = 0; y < d.h; ++y)
      for (int x = 0; x < d.w; ++x) oplane[y * d.w + x] = b[co];
    for (int ci = 0; ci < d.cin; ++ci) {
      const double* iplane = in + static_cast<std::size_t>(ci) * d.h * d.w;
      const double* wk = W + ((static_cast<std::size_t>(co) * d.cin) + ci) * d.k * d.k;
      for (int ky = 0; ky < d.k; ++ky) {
        for (int kx = 0; kx < d.k; ++kx) {
          const double wv = wk[ky * d.k + kx];
          if (wv == 0.0) continue;
          const int y0 = std::max(0, pad - ky), y1 = std::min(d.h, d.h + pad - ky);
          const int x0 = std::max(0, pad - kx), x1 = std::min(d.w, d.w + pad - kx);
          for (int y = y0; y < y1; ++y) {
            const double* irow = iplane + (y + ky - pad) * d.w + (kx - pad);
            double* orow = oplane + y * d.w;
            for (int x = x0; x < x1; ++x) orow[x] += wv * irow[x];
          }
        }
      }
    }
  }
}

void conv_backward(const double* W, const double* in, const double* dout,
                   const ConvDims& d, double* dW, double* db, double* din) {
  const int pad = d.k / 2;
  for (int co = 0; co < d.cout; ++co) {
    const double* doplane = dout + static_cast<std::size_t>(co) * d.h * d.w;
    double acc = 0.0;
    for (int i = 0; i < d.h * d.w; ++i) acc += doplane[i];
    db[co] += acc;
    for (int ci = 0; ci < d.cin; ++ci) {
      const double* iplane = in + static_cast<std::size_t>(ci) * d.h * d.w;
      double* diplane = din ? din + static_cast<std::size_t>(ci) * d.h * d.w : nullptr;
      const std::size_t wbase = ((static_cast<std::size_t>(co) * d.cin) + ci) * d.k * d.k;
      for (int ky = 0; ky < d.k; ++ky) {
        for (int kx = 0; kx < d.k; ++kx) {
          const double wv = W[wbase + ky * d.k + kx];
          double dw = 0.0;
          const int y0 = std::max(0, pad - ky), y1 = std::min(d.h, d.h + pad - ky);
          const int x0 = std::max(0, pad - kx), x1 = std::min(d.w, d.w + pad - kx);
          for (int y = y0; y < y1; ++y) {
            const double* irow = iplane + (y + ky - pad) * d.w + (kx - pad);
            const double* dorow = doplane + y * d.w;
            if (diplane) {
              double* dirow = diplane + (y + ky - pad) * d.w + (kx - pad);
              for (int x = x0; x < x1; ++x) {
                dw += dorow[x] * irow[x];
                dirow[x] += wv * dorow[x];
              }
            } else {
              for (int x = x0; x < x1; ++x) dw += dorow[x] * irow[x];
            }
          }
          dW[wbase + ky * d.k + kx] += dw;
        }
      }
    }
  }
}

// 2x2 max pooling, stride 2, even input sides. Ties go to the first cell in
// scan order, which keeps the backward routing deterministic.
void maxpool_forward(const double* in, int c, int h, int w, double* out, int* argmax) {
  const int oh = h / 2, ow = w / 2;
  for (int ci = 0; ci < c; ++ci) {
    const double* iplane = in + static_cast<std::size_t>(ci) * h * w;
    double* oplane = out + static_cast<std::size_t>(ci) * oh * ow;
    int* aplane = argmax + static_cast<std::size_t>(ci) * oh * ow;
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) {
        int best = (2 * y) * w + 2 * x;
        double bv = iplane[best];
        const int cand[3] = {(2 * y) * w + 2 * x + 1, (2 * y + 1) * w + 2 * x,
                             (2 * y + 1) * w + 2 * x + 1};
        for (int idx : cand) {
          if (iplane[idx] > bv) {
            bv = iplane[idx];
            best = idx;
          }
        }
        oplane[y * ow + x] = bv;
        aplane[y * ow + x] = best;
      }
    }
  }
}

void maxpool_backward(const double* dout, const int* argmax, int c, int h, int w,
                      double* din) {
  const int oh = h / 2, ow = w / 2;
  for (int ci = 0; ci < c; ++ci) {
    const double* doplane = dout + static_cast<std::size_t>(ci) * oh * ow;
    const int* aplane = argmax + static_cast<std::size_t>(ci) * oh * ow;
    double* diplane = din + static_cast<std::size_t>(ci) * h * w;
    for (int i = 0; i < oh * ow; ++i) diplane[aplane[i]] += doplane[i];
  }
}

// Nearest-neighbour 2x upsampling.
void upsample_forward(const double* in, int c, int h, int w, double* out) {
  const int oh = 2 * h, ow = 2 * w;
  for (int ci = 0; ci < c; ++ci) {
    const double* iplane = in + static_cast<std::size_t>(ci) * h * w;
    double* oplane = out + static_cast<std::size_t>(ci) * oh * ow;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double v = iplane[y * w + x];
        double* o0 = oplane + (2 * y) * ow + 2 * x;
        o0[0] = v;
        o0[1] = v;
        o0[ow] = v;
        o0[ow + 1] = v;
      }
    }
  }
}

void upsample_backward(const double* dout, int c, int h, int w, double* din) {
  const int ow = 2 * w;
  for (int ci = 0; ci < c; ++ci) {
    const double* doplane = dout + static_cast<std::size_t>(ci) * 4 * h * w;
    double* diplane = din + static_cast<std::size_t>(ci) * h * w;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const double* o0 = doplane + (2 * y) * ow + 2 * x;
        diplane[y * w + x] += o0[0] + o0[1] + o0[ow] + o0[ow + 1];
      }
    }
  }
}

void relu_inplace(double* v, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    if (v[i] < 0.0) v[i] = 0.0;
}

// dz = dy where the stored activated output is positive; zero elsewhere.
void relu_backward(const double* act, const double* dy, std::size_t n, double* dz) {
  for (std::size_t i = 0; i < n; ++i) dz[i] = act[i] > 0.0 ? dy[i] : 0.0;
}

// Stable softmax into p.
void softmax(const double* z, std::size_t n, double* p) {
  double m = z[0];
  for (std::size_t i = 1; i < n; ++i) m = std::max(m, z[i]);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    p[i] = std::exp(z[i] - m);
    s += p[i];
  }
  for (std::size_t i = 0; i < n; ++i) p[i] /= s;
}

double cross_entropy(const double* p, std::size_t n, int target) {
  (void)n;
  return -std::log(std::max(p[target], 1e-300));
}

// ---------------------------------------------------------------------------
// input validation
// ---------------------------------------------------------------------------

void check_image_input(const ModelArch& arch, const Sample& s) {
  if (static_cast<int>(s.input.size()) != arch.input_size())
    throw InputError("sample input size " + std::to_string(s.input.size()) +
                     " does not match model input " + std::to_string(arch.input_size()));
  for (double v : s.input)
    if (!std::isfinite(v)) throw InputError("non-finite sample input");
}

void check_lstm_input(const ModelArch& arch, std::span<const int> history) {
  if (static_cast<int>(history.size()) != arch.history)
    throw InputError("history length " + std::to_string(history.size()) +
                     " does not match model history " + std::to_string(arch.history));
  for (int t : history)
    if (t < 0 || t >= arch.vocab)
      throw InputError("token " + std::to_string(t) + " outside vocabulary of " +
                       std::to_string(arch.vocab));
}

void check_loss_kind(const ModelArch& arch, LossKind kind) {
  const bool ae = arch.kind == ArchKind::kDenseAutoencoder ||
                  arch.kind == ArchKind::kConvAutoencoder;
  if (ae && kind != LossKind::kReconstructionMse)
    throw InputError("autoencoders train with reconstruction-mse");
  if (!ae && kind != LossKind::kCrossEntropy)
    throw InputError(to_string(arch.kind) + " trains with cross-entropy");
}

// ---------------------------------------------------------------------------
// dense autoencoder
// ---------------------------------------------------------------------------

struct DenseAeWork {
  std::vector<std::vector<double>> act;  // act[0] = input, act[l+1] = layer l output
  std::vector<double> d_up, d_low;
};

double dense_ae_forward(const Model& m, const Sample& s, DenseAeWork& w) {
  const auto& widths = m.arch().widths;
  const std::size_t layers = widths.size() - 1;
  w.act.resize(layers + 1);
  w.act[0] = s.input;
  for (std::size_t l = 0; l < layers; ++l) {
    const Tensor& W = m.tensor(2 * l);
    const Tensor& b = m.tensor(2 * l + 1);
    const auto out = static_cast<std::size_t>(widths[l + 1]);
    const auto in = static_cast<std::size_t>(widths[l]);
    w.act[l + 1].resize(out);
    affine_forward(W.data(), b.data(), w.act[l].data(), out, in, w.act[l + 1].data());
    if (l + 1 < layers) {
      relu_inplace(w.act[l + 1].data(), out);
    } else {
      for (double& v : w.act[l + 1]) v = sigmoid(v);
    }
  }
  const auto n = static_cast<std::size_t>(widths.back());
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = w.act[layers][i] - s.input[i];
    loss += d * d;
  }
  return loss / static_cast<double>(n);
}

double dense_ae_gradient(const Model& m, const Sample& s, std::span<double> grad,
                         DenseAeWork& w) {
  const double loss = dense_ae_forward(m, s, w);
  const auto& widths = m.arch().widths;
  const std::size_t layers = widths.size() - 1;
  const auto n = static_cast<std::size_t>(widths.back());

  // dz of the output layer: mean-mse then sigmoid.
  w.d_up.resize(n);
  const auto& y = w.act[layers];
  for (std::size_t i = 0; i < n; ++i) {
    const double dy = 2.0 * (y[i] - s.input[i]) / static_cast<double>(n);
    w.d_up[i] = dy * y[i] * (1.0 - y[i]);
  }

  for (std::size_t l = layers; l-- > 0;) {
    const Tensor& W = m.tensor(2 * l);
    const auto out = static_cast<std::size_t>(widths[l + 1]);
    const auto in = static_cast<std::size_t>(widths[l]);
    double* dW = grad.data() + m.offset(2 * l);
    double* db = grad.data() + m.offset(2 * l + 1);
    if (l > 0) {
      zero(w.d_low, in);
      affine_backward(W.data(), w.act[l].data(), w.d_up.data(), out, in, dW, db,
                      w.d_low.data());
      // through the ReLU of layer l-1
      w.d_up.resize(in);
      relu_backward(w.act[l].data(), w.d_low.data(), in, w.d_up.data());
    } else {
      affine_backward(W.data(), w.act[0].data(), w.d_up.data(), out, in, dW, db, nullptr);
    }
  }
  return loss;
}

// ---------------------------------------------------------------------------
// classifier (conv-conv-dense softmax)
// ---------------------------------------------------------------------------

struct ClassifierWork {
  std::vector<double> r1, p1, r2, p2, logits, probs;
  std::vector<int> a1, a2;
  std::vector<std::vector<double>> hidden;  // post-relu dense activations
  std::vector<double> dflat, dr2, dp1, dr1, dz2, dz1, d_up, d_low;
};

// Fills w.probs; the caller applies the loss.
void classifier_probs(const Model& m, const Sample& s, ClassifierWork& w) {
  const ModelArch& a = m.arch();
  const int H = a.input_rows, W = a.input_cols;
  const int c1 = a.channels[0], c2 = a.channels[1];
  const ConvDims d1{1, c1, H, W, a.kernel};
  const ConvDims d2{c1, c2, H / 2, W / 2, a.kernel};

  w.r1.resize(static_cast<std::size_t>(c1) * H * W);
  conv_forward(m.tensor(0).data(), m.tensor(1).data(), s.input.data(), d1, w.r1.data());
  relu_inplace(w.r1.data(), w.r1.size());
  w.p1.resize(static_cast<std::size_t>(c1) * (H / 2) * (W / 2));
  w.a1.resize(w.p1.size());
  maxpool_forward(w.r1.data(), c1, H, W, w.p1.data(), w.a1.data());

  w.r2.resize(static_cast<std::size_t>(c2) * (H / 2) * (W / 2));
  conv_forward(m.tensor(2).data(), m.tensor(3).data(), w.p1.data(), d2, w.r2.data());
  relu_inplace(w.r2.data(), w.r2.size());
  w.p2.resize(static_cast<std::size_t>(c2) * (H / 4) * (W / 4));
  w.a2.resize(w.p2.size());
  maxpool_forward(w.r2.data(), c2, H / 2, W / 2, w.p2.data(), w.a2.data());

  const std::size_t n_hidden = a.widths.size();
  w.hidden.resize(n_hidden);
  const std::vector<double>* in = &w.p2;
  for (std::size_t l = 0; l < n_hidden; ++l) {
    const Tensor& wt = m.tensor(4 + 2 * l);
    const Tensor& bt = m.tensor(5 + 2 * l);
    w.hidden[l].resize(wt.shape[0]);
    affine_forward(wt.data(), bt.data(), in->data(), wt.shape[0], in->size(),
                   w.hidden[l].data());
    relu_inplace(w.hidden[l].data(), w.hidden[l].size());
    in = &w.hidden[l];
  }

  const auto classes = static_cast<std::size_t>(a.num_classes);
  const std::size_t out_idx = 4 + 2 * n_hidden;
  w.logits.resize(classes);
  affine_forward(m.tensor(out_idx).data(), m.tensor(out_idx + 1).data(), in->data(),
                 classes, in->size(), w.logits.data());
  w.probs.resize(classes);
  softmax(w.logits.data(), classes, w.probs.data());
}

double classifier_forward(const Model& m, const Sample& s, ClassifierWork& w) {
  classifier_probs(m, s, w);
  return cross_entropy(w.probs.data(), w.probs.size(), s.label);
}

double classifier_gradient(const Model& m, const Sample& s, std::span<double> grad,
                           ClassifierWork& w) {
  const double loss = classifier_forward(m, s, w);
  const ModelArch& a = m.arch();
  const int H = a.input_rows, W = a.input_cols;
  const int c1 = a.channels[0], c2 = a.channels[1];
  const ConvDims d1{1, c1, H, W, a.kernel};
  const ConvDims d2{c1, c2, H / 2, W / 2, a.kernel};
  const auto classes = static_cast<std::size_t>(a.num_classes);
  const std::size_t n_hidden = a.widths.size();
  const std::size_t out_idx = 4 + 2 * n_hidden;

  std::vector<double>& dlogits = w.logits;  // reuse
  for (std::size_t i = 0; i < classes; ++i)
    dlogits[i] = w.probs[i] - (static_cast<int>(i) == s.label ? 1.0 : 0.0);

  // dense stack backward down to the flattened pool output
  const std::vector<double>* top_in = n_hidden ? &w.hidden[n_hidden - 1] : &w.p2;
  zero(w.d_low, top_in->size());
  affine_backward(m.tensor(out_idx).data(), top_in->data(), dlogits.data(), classes,
                  top_in->size(), grad.data() + m.offset(out_idx),
                  grad.data() + m.offset(out_idx + 1), w.d_low.data());
  for (std::size_t l = n_hidden; l-- > 0;) {
    const std::vector<double>& act = w.hidden[l];
    w.d_up.resize(act.size());
    relu_backward(act.data(), w.d_low.data(), act.size(), w.d_up.data());
    const std::vector<double>* below = l > 0 ? &w.hidden[l - 1] : &w.p2;
    zero(w.d_low, below->size());
    affine_backward(m.tensor(4 + 2 * l).data(), below->data(), w.d_up.data(), act.size(),
                    below->size(), grad.data() + m.offset(4 + 2 * l),
                    grad.data() + m.offset(5 + 2 * l), w.d_low.data());
  }
  std::vector<double>& dflat = w.d_low;

  zero(w.dr2, w.r2.size());
  maxpool_backward(dflat.data(), w.a2.data(), c2, H / 2, W / 2, w.dr2.data());
  w.dz2.resize(w.r2.size());
  relu_backward(w.r2.data(), w.dr2.data(), w.r2.size(), w.dz2.data());

  zero(w.dp1, w.p1.size());
  conv_backward(m.tensor(2).data(), w.p1.data(), w.dz2.data(), d2,
                grad.data() + m.offset(2), grad.data() + m.offset(3), w.dp1.data());

  zero(w.dr1, w.r1.size());
  maxpool_backward(w.dp1.data(), w.a1.data(), c1, H, W, w.dr1.data());
  w.dz1.resize(w.r1.size());
  relu_backward(w.r1.data(), w.dr1.data(), w.r1.size(), w.dz1.data());

  conv_backward(m.tensor(0).data(), s.input.data(), w.dz1.data(), d1,
                grad.data() + m.offset(0), grad.data() + m.offset(1), nullptr);
  return loss;
}

// ---------------------------------------------------------------------------
// conv autoencoder
// ---------------------------------------------------------------------------

struct ConvAeWork {
  std::vector<double> r1, p1, r2, p2, r3, r4, u4, r5, u5, yhat;
  std::vector<int> a1, a2;
  std::vector<double> dy, du5, dr5, dz5, du4, dr4, dz4, dr3, dz3, dp2, dr2, dz2, dp1, dr1,
      dz1;
};

double conv_ae_forward(const Model& m, const Sample& s, ConvAeWork& w) {
  const ModelArch& a = m.arch();
  const int H = a.input_rows, W = a.input_cols;
  const int c1 = a.channels[0], c2 = a.channels[1], c3 = a.channels[2];
  const int k = a.kernel;

  w.r1.resize(static_cast<std::size_t>(c1) * H * W);
  conv_forward(m.tensor(0).data(), m.tensor(1).data(), s.input.data(),
               ConvDims{1, c1, H, W, k}, w.r1.data());
  relu_inplace(w.r1.data(), w.r1.size());
  w.p1.resize(w.r1.size() / 4);
  w.a1.resize(w.p1.size());
  maxpool_forward(w.r1.data(), c1, H, W, w.p1.data(), w.a1.data());

  w.r2.resize(static_cast<std::size_t>(c2) * (H / 2) * (W / 2));
  conv_forward(m.tensor(2).data(), m.tensor(3).data(), w.p1.data(),
               ConvDims{c1, c2, H / 2, W / 2, k}, w.r2.data());
  relu_inplace(w.r2.data(), w.r2.size());
  w.p2.resize(w.r2.size() / 4);
  w.a2.resize(w.p2.size());
  maxpool_forward(w.r2.data(), c2, H / 2, W / 2, w.p2.data(), w.a2.data());

  w.r3.resize(static_cast<std::size_t>(c3) * (H / 4) * (W / 4));
  conv_forward(m.tensor(4).data(), m.tensor(5).data(), w.p2.data(),
               ConvDims{c2, c3, H / 4, W / 4, k}, w.r3.data());
  relu_inplace(w.r3.data(), w.r3.size());

  w.r4.resize(static_cast<std::size_t>(c2) * (H / 4) * (W / 4));
  conv_forward(m.tensor(6).data(), m.tensor(7).data(), w.r3.data(),
               ConvDims{c3, c2, H / 4, W / 4, k}, w.r4.data());
  relu_inplace(w.r4.data(), w.r4.size());
  w.u4.resize(w.r4.size() * 4);
  upsample_forward(w.r4.data(), c2, H / 4, W / 4, w.u4.data());

  w.r5.resize(static_cast<std::size_t>(c1) * (H / 2) * (W / 2));
  conv_forward(m.tensor(8).data(), m.tensor(9).data(), w.u4.data(),
               ConvDims{c2, c1, H / 2, W / 2, k}, w.r5.data());
  relu_inplace(w.r5.data(), w.r5.size());
  w.u5.resize(w.r5.size() * 4);
  upsample_forward(w.r5.data(), c1, H / 2, W / 2, w.u5.data());

  w.yhat.resize(static_cast<std::size_t>(H) * W);
  conv_forward(m.tensor(10).data(), m.tensor(11).data(), w.u5.data(),
               ConvDims{c1, 1, H, W, k}, w.yhat.data());
  for (double& v : w.yhat) v = sigmoid(v);

  double loss = 0.0;
  for (std::size_t i = 0; i < w.yhat.size(); ++i) {
    const double d = w.yhat[i] - s.input[i];
    loss += d * d;
  }
  return loss / static_cast<double>(w.yhat.size());
}

double conv_ae_gradient(const Model& m, const Sample& s, std::span<double> grad,
                        ConvAeWork& w) {
  const double loss = conv_ae_forward(m, s, w);
  const ModelArch& a = m.arch();
  const int H = a.input_rows, W = a.input_cols;
  const int c1 = a.channels[0], c2 = a.channels[1], c3 = a.channels[2];
  const int k = a.kernel;
  const auto n = static_cast<double>(w.yhat.size());

  w.dy.resize(w.yhat.size());
  for (std::size_t i = 0; i < w.yhat.size(); ++i) {
    const double dmse = 2.0 * (w.yhat[i] - s.input[i]) / n;
    w.dy[i] = dmse * w.yhat[i] * (1.0 - w.yhat[i]);
  }

  zero(w.du5, w.u5.size());
  conv_backward(m.tensor(10).data(), w.u5.data(), w.dy.data(), ConvDims{c1, 1, H, W, k},
                grad.data() + m.offset(10), grad.data() + m.offset(11), w.du5.data());
  zero(w.dr5, w.r5.size());
  upsample_backward(w.du5.data(), c1, H / 2, W / 2, w.dr5.data());
  w.dz5.resize(w.r5.size());
  relu_backward(w.r5.data(), w.dr5.data(), w.r5.size(), w.dz5.data());

  zero(w.du4, w.u4.size());
  conv_backward(m.tensor(8).data(), w.u4.data(), w.dz5.data(),
                ConvDims{c2, c1, H / 2, W / 2, k}, grad.data() + m.offset(8),
                grad.data() + m.offset(9), w.du4.data());
  zero(w.dr4, w.r4.size());
  upsample_backward(w.du4.data(), c2, H / 4, W / 4, w.dr4.data());
  w.dz4.resize(w.r4.size());
  relu_backward(w.r4.data(), w.dr4.data(), w.r4.size(), w.dz4.data());

  zero(w.dr3, w.r3.size());
  conv_backward(m.tensor(6).data(), w.r3.data(), w.dz4.data(),
                ConvDims{c3, c2, H / 4, W / 4, k}, grad.data() + m.offset(6),
                grad.data() + m.offset(7), w.dr3.data());
  w.dz3.resize(w.r3.size());
  relu_backward(w.r3.data(), w.dr3.data(), w.r3.size(), w.dz3.data());

  zero(w.dp2, w.p2.size());
  conv_backward(m.tensor(4).data(), w.p2.data(), w.dz3.data(),
                ConvDims{c2, c3, H / 4, W / 4, k}, grad.data() + m.offset(4),
                grad.data() + m.offset(5), w.dp2.data());
  zero(w.dr2, w.r2.size());
  maxpool_backward(w.dp2.data(), w.a2.data(), c2, H / 2, W / 2, w.dr2.data());
  w.dz2.resize(w.r2.size());
  relu_backward(w.r2.data(), w.dr2.data(), w.r2.size(), w.dz2.data());

  zero(w.dp1, w.p1.size());
  conv_backward(m.tensor(2).data(), w.p1.data(), w.dz2.data(),
                ConvDims{c1, c2, H / 2, W / 2, k}, grad.data() + m.offset(2),
                grad.data() + m.offset(3), w.dp1.data());
  zero(w.dr1, w.r1.size());
  maxpool_backward(w.dp1.data(), w.a1.data(), c1, H, W, w.dr1.data());
  w.dz1.resize(w.r1.size());
  relu_backward(w.r1.data(), w.dr1.data(), w.r1.size(), w.dz1.data());

  conv_backward(m.tensor(0).data(), s.input.data(), w.dz1.data(), ConvDims{1, c1, H, W, k},
                grad.data() + m.offset(0), grad.data() + m.offset(1), nullptr);
  return loss;
}

// ---------------------------------------------------------------------------
// lstm language model
// ---------------------------------------------------------------------------

struct LstmWork {
  // per layer, per time step: gates (i,f,g,o of size u each), cell, tanh(cell), h
  std::vector<std::vector<double>> gates;  // [l] -> T * 4u
  std::vector<std::vector<double>> cell;   // [l] -> T * u
  std::vector<std::vector<double>> hid;    // [l] -> T * u
  std::vector<double> logits, probs;
  std::vector<std::vector<double>> dh, dc;
  std::vector<double> dz, dx;
};

// Runs the stacked LSTM over the history and fills the workspace; returns
// softmax probabilities in w.probs.
void lstm_forward(const Model& m, std::span<const int> history, LstmWork& w) {
  const ModelArch& a = m.arch();
  const int T = a.history;
  const std::size_t L = a.lstm_units.size();

  w.gates.resize(L);
  w.cell.resize(L);
  w.hid.resize(L);
  for (std::size_t l = 0; l < L; ++l) {
    const auto u = static_cast<std::size_t>(a.lstm_units[l]);
    w.gates[l].assign(static_cast<std::size_t>(T) * 4 * u, 0.0);
    w.cell[l].assign(static_cast<std::size_t>(T) * u, 0.0);
    w.hid[l].assign(static_cast<std::size_t>(T) * u, 0.0);
  }

  for (int t = 0; t < T; ++t) {
    for (std::size_t l = 0; l < L; ++l) {
      const auto u = static_cast<std::size_t>(a.lstm_units[l]);
      const std::size_t in_dim = l == 0 ? static_cast<std::size_t>(a.vocab)
                                        : static_cast<std::size_t>(a.lstm_units[l - 1]);
      const Tensor& wx = m.tensor(3 * l);
      const Tensor& wh = m.tensor(3 * l + 1);
      const Tensor& b = m.tensor(3 * l + 2);

      double* z = w.gates[l].data() + static_cast<std::size_t>(t) * 4 * u;
      // z = b + Wx * x_t (+ Wh * h_{t-1})
      if (l == 0) {
        // one-hot input: add column `token` of Wx
        const auto token = static_cast<std::size_t>(history[t]);
        for (std::size_t r = 0; r < 4 * u; ++r)
          z[r] = b.values[r] + wx.values[r * in_dim + token];
      } else {
        const double* x = w.hid[l - 1].data() + static_cast<std::size_t>(t) * in_dim;
        affine_forward(wx.data(), b.data(), x, 4 * u, in_dim, z);
      }
      if (t > 0) {
        const double* h_prev = w.hid[l].data() + static_cast<std::size_t>(t - 1) * u;
        for (std::size_t r = 0; r < 4 * u; ++r) {
          const double* row = wh.data() + r * u;
          double acc = z[r];
          for (std::size_t j = 0; j < u; ++j) acc += row[j] * h_prev[j];
          z[r] = acc;
        }
      }
      // activate gates in place: i, f, o logistic; g tanh
      for (std::size_t j = 0; j < u; ++j) z[j] = sigmoid(z[j]);
      for (std::size_t j = u; j < 2 * u; ++j) z[j] = sigmoid(z[j]);
      for (std::size_t j = 2 * u; j < 3 * u; ++j) z[j] = std::tanh(z[j]);
      for (std::size_t j = 3 * u; j < 4 * u; ++j) z[j] = sigmoid(z[j]);

      double* c = w.cell[l].data() + static_cast<std::size_t>(t) * u;
      double* h = w.hid[l].data() + static_cast<std::size_t>(t) * u;
      const double* c_prev =
          t > 0 ? w.cell[l].data() + static_cast<std::size_t>(t - 1) * u : nullptr;
      for (std::size_t j = 0; j < u; ++j) {
        const double iv = z[j], fv = z[u + j], gv = z[2 * u + j], ov = z[3 * u + j];
        const double cv = fv * (c_prev ? c_prev[j] : 0.0) + iv * gv;
        c[j] = cv;
        h[j] = ov * std::tanh(cv);
      }
    }
  }

  const auto top_u = static_cast<std::size_t>(a.lstm_units.back());
  const auto V = static_cast<std::size_t>(a.vocab);
  const Tensor& wo = m.tensor(3 * L);
  const Tensor& bo = m.tensor(3 * L + 1);
  const double* h_last = w.hid[L - 1].data() + static_cast<std::size_t>(T - 1) * top_u;
  w.logits.resize(V);
  affine_forward(wo.data(), bo.data(), h_last, V, top_u, w.logits.data());
  w.probs.resize(V);
  softmax(w.logits.data(), V, w.probs.data());
}

double lstm_gradient(const Model& m, const Sample& s, std::span<double> grad,
                     LstmWork& w) {
  check_lstm_input(m.arch(), s.history);
  const ModelArch& a = m.arch();
  if (s.next_token < 0 || s.next_token >= a.vocab)
    throw InputError("next token outside vocabulary");
  lstm_forward(m, s.history, w);

  const int T = a.history;
  const std::size_t L = a.lstm_units.size();
  const auto V = static_cast<std::size_t>(a.vocab);
  const auto top_u = static_cast<std::size_t>(a.lstm_units.back());
  const double loss = cross_entropy(w.probs.data(), V, s.next_token);

  std::vector<double>& dlogits = w.logits;  // reuse storage
  for (std::size_t i = 0; i < V; ++i)
    dlogits[i] = w.probs[i] - (static_cast<int>(i) == s.next_token ? 1.0 : 0.0);

  w.dh.resize(L);
  w.dc.resize(L);
  for (std::size_t l = 0; l < L; ++l) {
    const auto u = static_cast<std::size_t>(a.lstm_units[l]);
    w.dh[l].assign(u, 0.0);
    w.dc[l].assign(u, 0.0);
  }

  // Output layer feeds the top hidden state at the last step.
  const double* h_last = w.hid[L - 1].data() + static_cast<std::size_t>(T - 1) * top_u;
  affine_backward(m.tensor(3 * L).data(), h_last, dlogits.data(), V, top_u,
                  grad.data() + m.offset(3 * L), grad.data() + m.offset(3 * L + 1),
                  w.dh[L - 1].data());

  for (int t = T - 1; t >= 0; --t) {
    for (std::size_t l = L; l-- > 0;) {
      const auto u = static_cast<std::size_t>(a.lstm_units[l]);
      const std::size_t in_dim = l == 0 ? static_cast<std::size_t>(a.vocab)
                                        : static_cast<std::size_t>(a.lstm_units[l - 1]);
      const double* z = w.gates[l].data() + static_cast<std::size_t>(t) * 4 * u;
      const double* c = w.cell[l].data() + static_cast<std::size_t>(t) * u;
      const double* c_prev =
          t > 0 ? w.cell[l].data() + static_cast<std::size_t>(t - 1) * u : nullptr;

      w.dz.resize(4 * u);
      double* dz = w.dz.data();
      double* dh = w.dh[l].data();
      double* dc = w.dc[l].data();
      for (std::size_t j = 0; j < u; ++j) {
        const double iv = z[j], fv = z[u + j], gv = z[2 * u + j], ov = z[3 * u + j];
        const double tc = std::tanh(c[j]);
        const double dhj = dh[j];
        double dcj = dc[j] + dhj * ov * (1.0 - tc * tc);
        dz[3 * u + j] = dhj * tc * ov * (1.0 - ov);            // output gate
        dz[j] = dcj * gv * iv * (1.0 - iv);                    // input gate
        dz[2 * u + j] = dcj * iv * (1.0 - gv * gv);            // candidate
        dz[u + j] = dcj * (c_prev ? c_prev[j] : 0.0) * fv * (1.0 - fv);  // forget gate
        dc[j] = dcj * fv;  // flows to t-1
      }

      const Tensor& wx = m.tensor(3 * l);
      const Tensor& wh = m.tensor(3 * l + 1);
      double* dwx = grad.data() + m.offset(3 * l);
      double* dwh = grad.data() + m.offset(3 * l + 1);
      double* db = grad.data() + m.offset(3 * l + 2);

      // input path: one-hot column for layer 0, dense for upper layers
      if (l == 0) {
        const auto token = static_cast<std::size_t>(s.history[t]);
        for (std::size_t r = 0; r < 4 * u; ++r) {
          db[r] += dz[r];
          dwx[r * in_dim + token] += dz[r];
        }
      } else {
        const double* x = w.hid[l - 1].data() + static_cast<std::size_t>(t) * in_dim;
        w.dx.assign(in_dim, 0.0);
        affine_backward(wx.data(), x, dz, 4 * u, in_dim, dwx, db, w.dx.data());
        double* dh_below = w.dh[l - 1].data();
        for (std::size_t j = 0; j < in_dim; ++j) dh_below[j] += w.dx[j];
      }

      // recurrent path into t-1
      if (t > 0) {
        const double* h_prev = w.hid[l].data() + static_cast<std::size_t>(t - 1) * u;
        std::fill(dh, dh + u, 0.0);
        for (std::size_t r = 0; r < 4 * u; ++r) {
          const double g = dz[r];
          if (g == 0.0) continue;
          const double* row = wh.data() + r * u;
          double* drow = dwh + r * u;
          for (std::size_t j = 0; j < u; ++j) {
            drow[j] += g * h_prev[j];
            dh[j] += g * row[j];
          }
        }
      } else {
        std::fill(dh, dh + u, 0.0);
      }
    }
  }
  return loss;
}

}  // namespace

// ---------------------------------------------------------------------------
// public entry points
// ---------------------------------------------------------------------------

LossKind default_loss(ArchKind kind) {
  return (kind == ArchKind::kDenseAutoencoder || kind == ArchKind::kConvAutoencoder)
             ? LossKind::kReconstructionMse
             : LossKind::kCrossEntropy;
}

double forward_loss(const Model& model, const Sample& sample, LossKind kind) {
  check_loss_kind(model.arch(), kind);
  switch (model.arch().kind) {
    case ArchKind::kDenseAutoencoder: {
      check_image_input(model.arch(), sample);
      static thread_local DenseAeWork w;
      return dense_ae_forward(model, sample, w);
    }
    case ArchKind::kConvAutoencoder: {
      check_image_input(model.arch(), sample);
      static thread_local ConvAeWork w;
      return conv_ae_forward(model, sample, w);
    }
    case ArchKind::kClassifier: {
      check_image_input(model.arch(), sample);
      if (sample.label < 0 || sample.label >= model.arch().num_classes)
        throw InputError("label outside class range");
      static thread_local ClassifierWork w;
      return classifier_forward(model, sample, w);
    }
    case ArchKind::kLstmLm: {
      check_lstm_input(model.arch(), sample.history);
      if (sample.next_token < 0 || sample.next_token >= model.arch().vocab)
        throw InputError("next token outside vocabulary");
      static thread_local LstmWork w;
      lstm_forward(model, sample.history, w);
      return cross_entropy(w.probs.data(), w.probs.size(), sample.next_token);
    }
  }
  throw InputError("unreachable model kind");
}

double example_gradient(const Model& model, const Sample& sample, LossKind kind,
                        std::span<double> grad) {
  check_loss_kind(model.arch(), kind);
  if (grad.size() != model.param_count())
    throw InputError("gradient span does not match parameter count");
  switch (model.arch().kind) {
    case ArchKind::kDenseAutoencoder: {
      check_image_input(model.arch(), sample);
      static thread_local DenseAeWork w;
      return dense_ae_gradient(model, sample, grad, w);
    }
    case ArchKind::kConvAutoencoder: {
      check_image_input(model.arch(), sample);
      static thread_local ConvAeWork w;
      return conv_ae_gradient(model, sample, grad, w);
    }
    case ArchKind::kClassifier: {
      check_image_input(model.arch(), sample);
      if (sample.label < 0 || sample.label >= model.arch().num_classes)
        throw InputError("label outside class range");
      static thread_local ClassifierWork w;
      return classifier_gradient(model, sample, grad, w);
    }
    case ArchKind::kLstmLm: {
      static thread_local LstmWork w;
      return lstm_gradient(model, sample, grad, w);
    }
  }
  throw InputError("unreachable model kind");
}

GradientBatch per_example_gradients(const Model& model, std::span<const Sample> batch,
                                    LossKind kind) {
  if (batch.empty()) throw InputError("per-example gradients need a non-empty batch");
  GradientBatch out;
  out.batch_size = batch.size();
  out.param_count = model.param_count();
  out.rows.assign(out.batch_size * out.param_count, 0.0);
  for (std::size_t i = 0; i < batch.size(); ++i)
    example_gradient(model, batch[i], kind, out.row(i));
  return out;
}

std::vector<double> predict_distribution(const Model& model, std::span<const int> history) {
  if (model.arch().kind != ArchKind::kLstmLm)
    throw InputError("predict_distribution requires an lstm-lm model");
  check_lstm_input(model.arch(), history);
  static thread_local LstmWork w;
  lstm_forward(model, history, w);
  return w.probs;
}

std::vector<double> predict_classes(const Model& model, const Sample& sample) {
  if (model.arch().kind != ArchKind::kClassifier)
    throw InputError("predict_classes requires a classifier model");
  check_image_input(model.arch(), sample);
  static thread_local ClassifierWork w;
  classifier_probs(model, sample, w);
  return w.probs;
}

}  // namespace dpad::nn
