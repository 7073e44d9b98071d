#include "network.hpp"

#include <algorithm>
#include <cmath>

namespace melodist::detail {
namespace {

double sigmoid(double a) { return 1.0 / (1.0 + std::exp(-a)); }

// out[r] += W[r, :] . in
void matvec_acc(double* out, const double* W, std::size_t rows, std::size_t cols, const double* in) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = W + r * cols;
    double s = 0.0;
    for (std::size_t c = 0; c < cols; ++c) s += row[c] * in[c];
    out[r] += s;
  }
}

// out[c] += sum_r W[r, c] * d[r]
void matvec_t_acc(double* out, const double* W, std::size_t rows, std::size_t cols, const double* d) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = W + r * cols;
    const double dr = d[r];
    if (dr == 0.0) continue;
    for (std::size_t c = 0; c < cols; ++c) out[c] += row[c] * dr;
  }
}

// G[r, c] += d[r] * in[c]
void outer_acc(double* G, std::size_t rows, std::size_t cols, const double* d, const double* in) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double dr = d[r];
    if (dr == 0.0) continue;
    double* row = G + r * cols;
    for (std::size_t c = 0; c < cols; ++c) row[c] += dr * in[c];
  }
}

void add_to(double* dst, const double* src, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] += src[i];
}

}  // namespace

void stack_begin(StackTrace& tr, std::size_t layers, std::size_t hidden, std::size_t input_dim,
                 std::span<const double> h0, std::span<const double> c0, std::size_t reserve_steps) {
  tr.hidden = hidden;
  tr.steps = 0;
  tr.input_dims.assign(layers, hidden);
  tr.input_dims[0] = input_dim;
  tr.x.assign(layers, {});
  tr.h.assign(layers, {});
  tr.c.assign(layers, {});
  tr.gates.assign(layers, {});
  tr.tanh_c.assign(layers, {});
  for (std::size_t l = 0; l < layers; ++l) {
    tr.x[l].reserve(reserve_steps * tr.input_dims[l]);
    tr.h[l].reserve((reserve_steps + 1) * hidden);
    tr.c[l].reserve((reserve_steps + 1) * hidden);
    tr.gates[l].reserve(reserve_steps * 4 * hidden);
    tr.tanh_c[l].reserve(reserve_steps * hidden);
    if (h0.empty()) {
      tr.h[l].assign(hidden, 0.0);
    } else {
      tr.h[l].assign(h0.begin() + static_cast<std::ptrdiff_t>(l * hidden),
                     h0.begin() + static_cast<std::ptrdiff_t>((l + 1) * hidden));
    }
    if (c0.empty()) {
      tr.c[l].assign(hidden, 0.0);
    } else {
      tr.c[l].assign(c0.begin() + static_cast<std::ptrdiff_t>(l * hidden),
                     c0.begin() + static_cast<std::ptrdiff_t>((l + 1) * hidden));
    }
  }
}

std::span<const double> stack_step(StackTrace& tr, const double* w, const std::vector<LstmBlocks>& blocks,
                                   std::span<const double> input) {
  const std::size_t H = tr.hidden;
  const std::size_t t = tr.steps;
  std::vector<double> a(4 * H);
  for (std::size_t l = 0; l < blocks.size(); ++l) {
    const auto& blk = blocks[l];
    const std::size_t in_dim = tr.input_dims[l];
    if (l == 0) {
      tr.x[0].insert(tr.x[0].end(), input.begin(), input.end());
    } else {
      const double* below = tr.h[l - 1].data() + (t + 1) * H;
      tr.x[l].insert(tr.x[l].end(), below, below + H);
    }
    const double* x = tr.x[l].data() + t * in_dim;
    const double* h_prev = tr.h[l].data() + t * H;
    const double* c_prev = tr.c[l].data() + t * H;

    std::copy_n(w + blk.b.offset, 4 * H, a.begin());
    matvec_acc(a.data(), w + blk.wx.offset, 4 * H, in_dim, x);
    matvec_acc(a.data(), w + blk.wh.offset, 4 * H, H, h_prev);

    const std::size_t g0 = tr.gates[l].size();
    tr.gates[l].resize(g0 + 4 * H);
    double* gates = tr.gates[l].data() + g0;
    for (std::size_t k = 0; k < H; ++k) {
      gates[k] = sigmoid(a[k]);
      gates[H + k] = sigmoid(a[H + k]);
      gates[2 * H + k] = std::tanh(a[2 * H + k]);
      gates[3 * H + k] = sigmoid(a[3 * H + k]);
    }
    tr.c[l].resize(tr.c[l].size() + H);
    tr.h[l].resize(tr.h[l].size() + H);
    tr.tanh_c[l].resize(tr.tanh_c[l].size() + H);
    c_prev = tr.c[l].data() + t * H;
    double* c = tr.c[l].data() + (t + 1) * H;
    double* h = tr.h[l].data() + (t + 1) * H;
    double* tc = tr.tanh_c[l].data() + t * H;
    for (std::size_t k = 0; k < H; ++k) {
      c[k] = gates[H + k] * c_prev[k] + gates[k] * gates[2 * H + k];
      tc[k] = std::tanh(c[k]);
      h[k] = gates[3 * H + k] * tc[k];
    }
  }
  ++tr.steps;
  return tr.top(t);
}

void stack_backward(const StackTrace& tr, const double* w, double* g, const std::vector<LstmBlocks>& blocks,
                    std::span<const double> d_top, std::span<double> d_inputs, std::span<double> dh0,
                    std::span<double> dc0) {
  const std::size_t H = tr.hidden;
  const std::size_t layers = blocks.size();
  std::vector<std::vector<double>> dh_rec(layers, std::vector<double>(H, 0.0));
  std::vector<std::vector<double>> dc_rec(layers, std::vector<double>(H, 0.0));
  std::vector<double> dh(H);
  std::vector<double> da(4 * H);
  std::vector<double> dx_below(H);
  std::fill(d_inputs.begin(), d_inputs.end(), 0.0);

  for (std::size_t t = tr.steps; t-- > 0;) {
    for (std::size_t l = layers; l-- > 0;) {
      const auto& blk = blocks[l];
      const std::size_t in_dim = tr.input_dims[l];
      for (std::size_t k = 0; k < H; ++k) {
        dh[k] = dh_rec[l][k] + (l + 1 == layers ? d_top[t * H + k] : dx_below[k]);
      }
      const double* gates = tr.gates[l].data() + t * 4 * H;
      const double* c_prev = tr.c[l].data() + t * H;
      const double* tc = tr.tanh_c[l].data() + t * H;
      auto& dc = dc_rec[l];
      for (std::size_t k = 0; k < H; ++k) {
        const double i = gates[k], f = gates[H + k], gg = gates[2 * H + k], o = gates[3 * H + k];
        const double dct = dc[k] + dh[k] * o * (1.0 - tc[k] * tc[k]);
        da[k] = dct * gg * i * (1.0 - i);
        da[H + k] = dct * c_prev[k] * f * (1.0 - f);
        da[2 * H + k] = dct * i * (1.0 - gg * gg);
        da[3 * H + k] = dh[k] * tc[k] * o * (1.0 - o);
        dc[k] = dct * f;
      }
      const double* x = tr.x[l].data() + t * in_dim;
      const double* h_prev = tr.h[l].data() + t * H;
      outer_acc(g + blk.wx.offset, 4 * H, in_dim, da.data(), x);
      outer_acc(g + blk.wh.offset, 4 * H, H, da.data(), h_prev);
      add_to(g + blk.b.offset, da.data(), 4 * H);

      std::fill(dh_rec[l].begin(), dh_rec[l].end(), 0.0);
      matvec_t_acc(dh_rec[l].data(), w + blk.wh.offset, 4 * H, H, da.data());
      if (l > 0) {
        std::fill(dx_below.begin(), dx_below.end(), 0.0);
        matvec_t_acc(dx_below.data(), w + blk.wx.offset, 4 * H, in_dim, da.data());
      } else if (!d_inputs.empty()) {
        matvec_t_acc(d_inputs.data() + t * in_dim, w + blk.wx.offset, 4 * H, in_dim, da.data());
      }
    }
  }
  for (std::size_t l = 0; l < layers; ++l) {
    if (!dh0.empty()) std::copy(dh_rec[l].begin(), dh_rec[l].end(), dh0.begin() + static_cast<std::ptrdiff_t>(l * H));
    if (!dc0.empty()) std::copy(dc_rec[l].begin(), dc_rec[l].end(), dc0.begin() + static_cast<std::ptrdiff_t>(l * H));
  }
}

void encode_forward(const ModelParams& params, const Layout& layout, std::span<const int> tokens,
                    EncodeTrace& tr) {
  const auto& arch = params.arch;
  const auto H = static_cast<std::size_t>(arch.hidden);
  const auto N = static_cast<std::size_t>(arch.features);
  const double* w = params.weights.data();
  tr.tokens.assign(tokens.begin(), tokens.end());
  stack_begin(tr.stack, layout.encoder.size(), H, H, {}, {}, tokens.size());
  for (int tok : tokens) {
    const double* e = w + layout.embed.offset + static_cast<std::size_t>(tok) * H;
    stack_step(tr.stack, w, layout.encoder, {e, H});
  }
  tr.pre.assign(w + layout.enc_b.offset, w + layout.enc_b.offset + N);
  matvec_acc(tr.pre.data(), w + layout.enc_w.offset, N, H, tr.stack.top(tr.stack.steps - 1).data());
  tr.features.resize(N);
  for (std::size_t k = 0; k < N; ++k) tr.features[k] = tr.pre[k] > 0.0 ? tr.pre[k] : 0.0;
}

void encode_backward(const ModelParams& params, const Layout& layout, const EncodeTrace& tr,
                     std::span<const double> d_features, double* grad) {
  const auto H = static_cast<std::size_t>(params.arch.hidden);
  const auto N = static_cast<std::size_t>(params.arch.features);
  const double* w = params.weights.data();
  const std::size_t T = tr.stack.steps;

  std::vector<double> d_pre(N);
  bool any = false;
  for (std::size_t k = 0; k < N; ++k) {
    d_pre[k] = tr.pre[k] > 0.0 ? d_features[k] : 0.0;
    any = any || d_pre[k] != 0.0;
  }
  if (!any) return;
  const double* h_last = tr.stack.top(T - 1).data();
  outer_acc(grad + layout.enc_w.offset, N, H, d_pre.data(), h_last);
  add_to(grad + layout.enc_b.offset, d_pre.data(), N);

  std::vector<double> d_top(T * H, 0.0);
  matvec_t_acc(d_top.data() + (T - 1) * H, w + layout.enc_w.offset, N, H, d_pre.data());
  std::vector<double> d_inputs(T * H);
  stack_backward(tr.stack, w, grad, layout.encoder, d_top, d_inputs, {}, {});
  for (std::size_t t = 0; t < T; ++t) {
    add_to(grad + layout.embed.offset + static_cast<std::size_t>(tr.tokens[t]) * H, d_inputs.data() + t * H, H);
  }
}

void decode_forward(const ModelParams& params, const Layout& layout, std::span<const double> features,
                    int label, std::span<const int> target, DecodeTrace& tr) {
  const auto& arch = params.arch;
  const auto H = static_cast<std::size_t>(arch.hidden);
  const auto A = static_cast<std::size_t>(arch.alphabet);
  const auto L = static_cast<std::size_t>(arch.length);
  const std::size_t layers = layout.decoder.size();
  const double* w = params.weights.data();

  tr.z.assign(features.begin(), features.end());
  tr.label = label;
  if (arch.conditioned()) {
    const auto D = static_cast<std::size_t>(arch.label_dim);
    const double* e = w + layout.label_embed.offset + static_cast<std::size_t>(label) * D;
    tr.z.insert(tr.z.end(), e, e + D);
  }
  std::vector<double> init(w + layout.init_b.offset, w + layout.init_b.offset + layout.init_b.rows);
  matvec_acc(init.data(), w + layout.init_w.offset, layout.init_w.rows, layout.init_w.cols, tr.z.data());
  std::vector<double> h0(layers * H);
  std::vector<double> c0(layers * H);
  for (std::size_t l = 0; l < layers; ++l) {
    std::copy_n(init.begin() + static_cast<std::ptrdiff_t>(2 * l * H), H, h0.begin() + static_cast<std::ptrdiff_t>(l * H));
    std::copy_n(init.begin() + static_cast<std::ptrdiff_t>((2 * l + 1) * H), H, c0.begin() + static_cast<std::ptrdiff_t>(l * H));
  }
  const std::size_t in_dim = layout.decoder.front().wx.cols;
  stack_begin(tr.stack, layers, H, in_dim, h0, c0, L);

  tr.inputs.assign(L, 0);
  tr.probs.assign(L * A, 0.0);
  std::vector<double> input(in_dim);
  if (in_dim > H) std::copy(tr.z.begin(), tr.z.end(), input.begin() + static_cast<std::ptrdiff_t>(H));
  int prev = static_cast<int>(A);  // start symbol
  for (std::size_t i = 0; i < L; ++i) {
    tr.inputs[i] = prev;
    const double* e = w + layout.embed.offset + static_cast<std::size_t>(prev) * H;
    std::copy_n(e, H, input.begin());
    auto top = stack_step(tr.stack, w, layout.decoder, input);
    double* p = tr.probs.data() + i * A;
    std::copy_n(w + layout.out_b.offset, A, p);
    matvec_acc(p, w + layout.out_w.offset, A, H, top.data());
    const double mx = *std::max_element(p, p + A);
    double sum = 0.0;
    for (std::size_t a = 0; a < A; ++a) {
      p[a] = std::exp(p[a] - mx);
      sum += p[a];
    }
    for (std::size_t a = 0; a < A; ++a) p[a] /= sum;
    if (!target.empty() && target[i] >= 0) {
      prev = target[i];
    } else {
      prev = static_cast<int>(std::max_element(p, p + A) - p);
    }
  }
}

double cross_entropy(const DecodeTrace& tr, std::span<const int> target, std::size_t alphabet) {
  double loss = 0.0;
  for (std::size_t i = 0; i < target.size(); ++i) {
    loss -= std::log(std::max(tr.probs[i * alphabet + static_cast<std::size_t>(target[i])], 1e-300));
  }
  return loss;
}

void decode_backward(const ModelParams& params, const Layout& layout, const DecodeTrace& tr,
                     std::span<const int> target, double scale, double* grad, std::span<double> d_features) {
  const auto& arch = params.arch;
  const auto H = static_cast<std::size_t>(arch.hidden);
  const auto A = static_cast<std::size_t>(arch.alphabet);
  const auto N = static_cast<std::size_t>(arch.features);
  const std::size_t T = tr.stack.steps;
  const std::size_t layers = layout.decoder.size();
  const double* w = params.weights.data();

  std::vector<double> d_top(T * H, 0.0);
  std::vector<double> dlogit(A);
  for (std::size_t i = 0; i < T; ++i) {
    const double* p = tr.probs.data() + i * A;
    for (std::size_t a = 0; a < A; ++a) dlogit[a] = scale * p[a];
    dlogit[static_cast<std::size_t>(target[i])] -= scale;
    const double* h = tr.stack.top(i).data();
    outer_acc(grad + layout.out_w.offset, A, H, dlogit.data(), h);
    add_to(grad + layout.out_b.offset, dlogit.data(), A);
    matvec_t_acc(d_top.data() + i * H, w + layout.out_w.offset, A, H, dlogit.data());
  }

  const std::size_t in_dim = layout.decoder.front().wx.cols;
  std::vector<double> d_inputs(T * in_dim);
  std::vector<double> dh0(layers * H);
  std::vector<double> dc0(layers * H);
  stack_backward(tr.stack, w, grad, layout.decoder, d_top, d_inputs, dh0, dc0);
  std::vector<double> dz(tr.z.size(), 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    const double* row = d_inputs.data() + t * in_dim;
    add_to(grad + layout.embed.offset + static_cast<std::size_t>(tr.inputs[t]) * H, row, H);
    if (in_dim > H) add_to(dz.data(), row + H, dz.size());
  }

  std::vector<double> d_init(2 * layers * H);
  for (std::size_t l = 0; l < layers; ++l) {
    std::copy_n(dh0.begin() + static_cast<std::ptrdiff_t>(l * H), H, d_init.begin() + static_cast<std::ptrdiff_t>(2 * l * H));
    std::copy_n(dc0.begin() + static_cast<std::ptrdiff_t>(l * H), H, d_init.begin() + static_cast<std::ptrdiff_t>((2 * l + 1) * H));
  }
  outer_acc(grad + layout.init_w.offset, layout.init_w.rows, layout.init_w.cols, d_init.data(), tr.z.data());
  add_to(grad + layout.init_b.offset, d_init.data(), d_init.size());
  matvec_t_acc(dz.data(), w + layout.init_w.offset, layout.init_w.rows, layout.init_w.cols, d_init.data());
  add_to(d_features.data(), dz.data(), N);
  if (arch.conditioned()) {
    const auto D = static_cast<std::size_t>(arch.label_dim);
    add_to(grad + layout.label_embed.offset + static_cast<std::size_t>(tr.label) * D, dz.data() + N, D);
  }
}

}  // namespace melodist::detail
