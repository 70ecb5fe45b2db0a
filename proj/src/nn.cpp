#include "goalex/nn.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstring>
#include <sstream>

namespace goalex {

namespace {

using RowMat = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(ch))) {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

Activation parse_act(const std::string& s) {
  if (s == "relu") return Activation::Relu;
  if (s == "tanh") return Activation::Tanh;
  if (s == "none") return Activation::None;
  throw ConfigError("unknown activation '" + s + "'");
}

int parse_pos_int(const std::string& s, const char* what) {
  try {
    size_t pos = 0;
    int v = std::stoi(s, &pos);
    if (pos != s.size() || v <= 0) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(std::string("bad ") + what + " '" + s + "' in network spec");
  }
}

void apply_activation(Activation act, float* p, int64_t n) {
  switch (act) {
    case Activation::None:
      return;
    case Activation::Relu:
      for (int64_t i = 0; i < n; ++i) p[i] = p[i] > 0.0f ? p[i] : 0.0f;
      return;
    case Activation::Tanh:
      for (int64_t i = 0; i < n; ++i) p[i] = std::tanh(p[i]);
      return;
  }
}

// d(post)/d(pre) expressed through the post-activation value.
void activation_backward(Activation act, const float* post, float* grad, int64_t n) {
  switch (act) {
    case Activation::None:
      return;
    case Activation::Relu:
      for (int64_t i = 0; i < n; ++i) grad[i] = post[i] > 0.0f ? grad[i] : 0.0f;
      return;
    case Activation::Tanh:
      for (int64_t i = 0; i < n; ++i) grad[i] *= 1.0f - post[i] * post[i];
      return;
  }
}

Shape3 conv_out_shape(Shape3 in, const LayerSpec& l) {
  if (in.h < l.kernel || in.w < l.kernel) {
    throw ConfigError("conv kernel larger than input plane");
  }
  Shape3 out;
  out.h = (in.h - l.kernel) / l.stride + 1;
  out.w = (in.w - l.kernel) / l.stride + 1;
  out.c = l.out;
  return out;
}

// Rows: one per output position (n, oy, ox); columns: (ky, kx, ic).
void im2col(const float* x, int n, Shape3 in, const LayerSpec& l, Shape3 out, float* col) {
  const int k = l.kernel, s = l.stride;
  const int64_t row_len = static_cast<int64_t>(k) * k * in.c;
  const int64_t plane = static_cast<int64_t>(in.h) * in.w * in.c;
  float* dst = col;
  for (int b = 0; b < n; ++b) {
    const float* img = x + b * plane;
    for (int oy = 0; oy < out.h; ++oy) {
      for (int ox = 0; ox < out.w; ++ox) {
        for (int ky = 0; ky < k; ++ky) {
          const float* src = img + ((static_cast<int64_t>(oy) * s + ky) * in.w +
                                    static_cast<int64_t>(ox) * s) *
                                       in.c;
          std::memcpy(dst, src, sizeof(float) * static_cast<size_t>(k) * in.c);
          dst += static_cast<int64_t>(k) * in.c;
        }
      }
    }
  }
  (void)row_len;
}

// Scatter-add of column gradients back onto the input image.
void col2im(const float* col, int n, Shape3 in, const LayerSpec& l, Shape3 out, float* dx) {
  const int k = l.kernel, s = l.stride;
  const int64_t plane = static_cast<int64_t>(in.h) * in.w * in.c;
  const float* src = col;
  for (int b = 0; b < n; ++b) {
    float* img = dx + b * plane;
    for (int oy = 0; oy < out.h; ++oy) {
      for (int ox = 0; ox < out.w; ++ox) {
        for (int ky = 0; ky < k; ++ky) {
          float* dst = img + ((static_cast<int64_t>(oy) * s + ky) * in.w +
                              static_cast<int64_t>(ox) * s) *
                                 in.c;
          for (int j = 0; j < k * in.c; ++j) dst[j] += src[j];
          src += static_cast<int64_t>(k) * in.c;
        }
      }
    }
  }
}

}  // namespace

const char* activation_name(Activation a) {
  switch (a) {
    case Activation::Relu: return "relu";
    case Activation::Tanh: return "tanh";
    case Activation::None: return "none";
  }
  return "none";
}

NetworkSpec NetworkSpec::parse(const std::string& text) {
  NetworkSpec spec;
  for (const auto& tok : split(text, ',')) {
    if (tok.empty()) continue;
    auto f = split(tok, ':');
    LayerSpec l;
    if (f[0] == "conv") {
      if (f.size() != 5) throw ConfigError("conv layer needs conv:OUT:KERNEL:STRIDE:ACT");
      l.kind = LayerSpec::Kind::Conv;
      l.out = parse_pos_int(f[1], "conv channels");
      l.kernel = parse_pos_int(f[2], "kernel");
      l.stride = parse_pos_int(f[3], "stride");
      l.act = parse_act(f[4]);
    } else if (f[0] == "dense") {
      if (f.size() != 3) throw ConfigError("dense layer needs dense:OUT:ACT");
      l.kind = LayerSpec::Kind::Dense;
      l.out = parse_pos_int(f[1], "dense dim");
      l.act = parse_act(f[2]);
    } else {
      throw ConfigError("unknown layer kind '" + f[0] + "'");
    }
    spec.layers.push_back(l);
  }
  if (spec.layers.empty()) throw ConfigError("network spec has no layers");
  return spec;
}

std::string NetworkSpec::to_string() const {
  std::ostringstream os;
  for (size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    if (i) os << ",";
    if (l.kind == LayerSpec::Kind::Conv) {
      os << "conv:" << l.out << ":" << l.kernel << ":" << l.stride << ":"
         << activation_name(l.act);
    } else {
      os << "dense:" << l.out << ":" << activation_name(l.act);
    }
  }
  return os.str();
}

Network::Network(const NetworkSpec& spec, Shape3 input, int aux_dim, Rng& init_rng)
    : spec_(spec), input_(input), aux_dim_(aux_dim) {
  if (spec_.layers.empty()) throw ConfigError("network spec has no layers");
  if (input.h <= 0 || input.w <= 0 || input.c <= 0) {
    throw ConfigError("bad network input shape");
  }
  Shape3 cur = input;
  bool flattened = false;
  int flat_dim = 0;
  for (size_t i = 0; i < spec_.layers.size(); ++i) {
    const auto& l = spec_.layers[i];
    if (l.kind == LayerSpec::Kind::Conv) {
      if (flattened) throw ConfigError("conv layer after dense layer");
      Shape3 out = conv_out_shape(cur, l);
      const int fan_in = l.kernel * l.kernel * cur.c;
      Tensor w({l.out, l.kernel, l.kernel, cur.c});
      const float bound = std::sqrt(1.0f / static_cast<float>(fan_in));
      for (auto& v : w.data) v = init_rng.uniform_float(-bound, bound);
      weights_.push_back(std::move(w));
      biases_.push_back(Tensor({l.out}));
      out_shapes_.push_back(out);
      in_dims_.push_back(0);
      cur = out;
    } else {
      if (!flattened) {
        flattened = true;
        first_dense_ = static_cast<int>(i);
        flat_dim = static_cast<int>(cur.numel()) + aux_dim_;
      }
      const int fan_in = flat_dim;
      Tensor w({l.out, fan_in});
      const float bound = std::sqrt(1.0f / static_cast<float>(fan_in));
      for (auto& v : w.data) v = init_rng.uniform_float(-bound, bound);
      weights_.push_back(std::move(w));
      biases_.push_back(Tensor({l.out}));
      out_shapes_.push_back({1, 1, l.out});
      in_dims_.push_back(fan_in);
      flat_dim = l.out;
    }
  }
  if (!flattened && aux_dim_ > 0) {
    throw ConfigError("aux input requires at least one dense layer");
  }
  if (!flattened) throw ConfigError("network must end in a dense layer");
  if (spec_.layers.back().kind != LayerSpec::Kind::Dense) {
    throw ConfigError("network must end in a dense layer");
  }
  out_dim_ = spec_.layers.back().out;
}

Tensor Network::forward(const Tensor& x, const Tensor* aux) const {
  return forward(x, aux, nullptr);
}

Tensor Network::forward(const Tensor& x, const Tensor* aux, Trace* trace) const {
  if (x.shape.size() != 4 || x.dim(1) != input_.h || x.dim(2) != input_.w ||
      x.dim(3) != input_.c) {
    throw ConfigError("forward: input shape " + x.shape_str() + " does not match network");
  }
  const int n = x.dim(0);
  if (aux_dim_ > 0) {
    if (aux == nullptr || aux->shape.size() != 2 || aux->dim(0) != n ||
        aux->dim(1) != aux_dim_) {
      throw ConfigError("forward: aux input missing or mis-shaped");
    }
  }
  if (trace) {
    *trace = Trace{};
    trace->input = x;
    if (aux_dim_ > 0) trace->aux = *aux;
    trace->batch = n;
  }

  Tensor cur = x;
  Shape3 cur_shape = input_;
  bool flattened = false;
  for (size_t i = 0; i < spec_.layers.size(); ++i) {
    const auto& l = spec_.layers[i];
    if (l.kind == LayerSpec::Kind::Conv) {
      const Shape3 out = out_shapes_[i];
      const int64_t rows = static_cast<int64_t>(n) * out.h * out.w;
      const int64_t k_len = static_cast<int64_t>(l.kernel) * l.kernel * cur_shape.c;
      Tensor col({static_cast<int>(rows), static_cast<int>(k_len)});
      im2col(cur.ptr(), n, cur_shape, l, out, col.ptr());
      Tensor out_t({n, out.h, out.w, out.c});
      {
        CMapMat cm(col.ptr(), rows, k_len);
        CMapMat wm(weights_[i].ptr(), l.out, k_len);
        MapMat om(out_t.ptr(), rows, l.out);
        om.noalias() = cm * wm.transpose();
        om.rowwise() += Eigen::Map<const Eigen::RowVectorXf>(biases_[i].ptr(), l.out);
      }
      apply_activation(l.act, out_t.ptr(), out_t.numel());
      check_finite(out_t, "conv activations");
      if (trace) {
        trace->cols.push_back(std::move(col));
        trace->outs.push_back(out_t);
      }
      cur = std::move(out_t);
      cur_shape = out;
    } else {
      int in_dim = in_dims_[i];
      const float* in_ptr = cur.ptr();
      Tensor cat;
      if (!flattened) {
        flattened = true;
        if (aux_dim_ > 0) {
          const int flat = in_dim - aux_dim_;
          cat = Tensor({n, in_dim});
          for (int b = 0; b < n; ++b) {
            std::memcpy(cat.ptr() + static_cast<int64_t>(b) * in_dim,
                        cur.ptr() + static_cast<int64_t>(b) * flat,
                        sizeof(float) * static_cast<size_t>(flat));
            std::memcpy(cat.ptr() + static_cast<int64_t>(b) * in_dim + flat,
                        aux->ptr() + static_cast<int64_t>(b) * aux_dim_,
                        sizeof(float) * static_cast<size_t>(aux_dim_));
          }
          in_ptr = cat.ptr();
          if (trace) trace->dense0_in = cat;
        }
      }
      Tensor out_t({n, l.out});
      {
        CMapMat xm(in_ptr, n, in_dim);
        CMapMat wm(weights_[i].ptr(), l.out, in_dim);
        MapMat om(out_t.ptr(), n, l.out);
        om.noalias() = xm * wm.transpose();
        om.rowwise() += Eigen::Map<const Eigen::RowVectorXf>(biases_[i].ptr(), l.out);
      }
      apply_activation(l.act, out_t.ptr(), out_t.numel());
      check_finite(out_t, "dense activations");
      if (trace) trace->outs.push_back(out_t);
      cur = std::move(out_t);
    }
  }
  return cur;
}

Network::Gradients Network::backward(const Trace& trace, const Tensor& upstream) const {
  const int n = trace.batch;
  if (upstream.shape.size() != 2 || upstream.dim(0) != n || upstream.dim(1) != out_dim_) {
    throw ConfigError("backward: upstream shape " + upstream.shape_str() +
                      " does not match network output");
  }
  Gradients g;
  g.weight.resize(weights_.size());
  g.bias.resize(biases_.size());

  Tensor delta = upstream;  // gradient w.r.t. post-activation of current layer
  int conv_count = 0;
  for (const auto& l : spec_.layers) {
    if (l.kind == LayerSpec::Kind::Conv) ++conv_count;
  }

  for (int i = static_cast<int>(spec_.layers.size()) - 1; i >= 0; --i) {
    const auto& l = spec_.layers[static_cast<size_t>(i)];
    const Tensor& post = trace.outs[static_cast<size_t>(i)];
    activation_backward(l.act, post.ptr(), delta.ptr(), delta.numel());
    check_finite(delta, "backward deltas");

    if (l.kind == LayerSpec::Kind::Dense) {
      const int in_dim = in_dims_[static_cast<size_t>(i)];
      // Input to this layer as a [n, in_dim] matrix.
      const float* in_ptr;
      if (i == first_dense_) {
        in_ptr = (aux_dim_ > 0) ? trace.dense0_in.ptr()
                                : (i == 0 ? trace.input.ptr()
                                          : trace.outs[static_cast<size_t>(i - 1)].ptr());
      } else {
        in_ptr = trace.outs[static_cast<size_t>(i - 1)].ptr();
      }
      g.weight[static_cast<size_t>(i)] = Tensor({l.out, in_dim});
      g.bias[static_cast<size_t>(i)] = Tensor({l.out});
      Tensor dx({n, in_dim});
      {
        CMapMat dm(delta.ptr(), n, l.out);
        CMapMat xm(in_ptr, n, in_dim);
        CMapMat wm(weights_[static_cast<size_t>(i)].ptr(), l.out, in_dim);
        MapMat gw(g.weight[static_cast<size_t>(i)].ptr(), l.out, in_dim);
        gw.noalias() = dm.transpose() * xm;
        Eigen::Map<Eigen::RowVectorXf> gb(g.bias[static_cast<size_t>(i)].ptr(), l.out);
        gb = dm.colwise().sum();
        MapMat dxm(dx.ptr(), n, in_dim);
        dxm.noalias() = dm * wm;
      }
      if (i == first_dense_) {
        if (aux_dim_ > 0) {
          const int flat = in_dim - aux_dim_;
          g.aux = Tensor({n, aux_dim_});
          Tensor dflat({n, flat});
          for (int b = 0; b < n; ++b) {
            std::memcpy(dflat.ptr() + static_cast<int64_t>(b) * flat,
                        dx.ptr() + static_cast<int64_t>(b) * in_dim,
                        sizeof(float) * static_cast<size_t>(flat));
            std::memcpy(g.aux.ptr() + static_cast<int64_t>(b) * aux_dim_,
                        dx.ptr() + static_cast<int64_t>(b) * in_dim + flat,
                        sizeof(float) * static_cast<size_t>(aux_dim_));
          }
          delta = std::move(dflat);
        } else {
          delta = std::move(dx);
        }
      } else {
        delta = std::move(dx);
      }
    } else {
      --conv_count;
      const Shape3 out = out_shapes_[static_cast<size_t>(i)];
      const Shape3 in_shape = (i == 0) ? input_ : out_shapes_[static_cast<size_t>(i - 1)];
      const int64_t rows = static_cast<int64_t>(n) * out.h * out.w;
      const int64_t k_len = static_cast<int64_t>(l.kernel) * l.kernel * in_shape.c;
      const Tensor& col = trace.cols[static_cast<size_t>(conv_count)];

      g.weight[static_cast<size_t>(i)] = Tensor({l.out, l.kernel, l.kernel, in_shape.c});
      g.bias[static_cast<size_t>(i)] = Tensor({l.out});
      Tensor dcol({static_cast<int>(rows), static_cast<int>(k_len)});
      {
        CMapMat dm(delta.ptr(), rows, l.out);
        CMapMat cm(col.ptr(), rows, k_len);
        CMapMat wm(weights_[static_cast<size_t>(i)].ptr(), l.out, k_len);
        MapMat gw(g.weight[static_cast<size_t>(i)].ptr(), l.out, k_len);
        gw.noalias() = dm.transpose() * cm;
        Eigen::Map<Eigen::RowVectorXf> gb(g.bias[static_cast<size_t>(i)].ptr(), l.out);
        gb = dm.colwise().sum();
        MapMat dcm(dcol.ptr(), rows, k_len);
        dcm.noalias() = dm * wm;
      }
      Tensor dx({n, in_shape.h, in_shape.w, in_shape.c});
      col2im(dcol.ptr(), n, in_shape, l, out, dx.ptr());
      delta = std::move(dx);
    }
  }
  g.input = std::move(delta);
  check_finite(g.input, "input gradient");
  return g;
}

std::vector<Tensor*> Network::params() {
  std::vector<Tensor*> out;
  for (size_t i = 0; i < weights_.size(); ++i) {
    out.push_back(&weights_[i]);
    out.push_back(&biases_[i]);
  }
  return out;
}

std::vector<const Tensor*> Network::params() const {
  std::vector<const Tensor*> out;
  for (size_t i = 0; i < weights_.size(); ++i) {
    out.push_back(&weights_[i]);
    out.push_back(&biases_[i]);
  }
  return out;
}

std::vector<const Tensor*> Network::grad_ptrs(const Gradients& g) {
  std::vector<const Tensor*> out;
  for (size_t i = 0; i < g.weight.size(); ++i) {
    out.push_back(&g.weight[i]);
    out.push_back(&g.bias[i]);
  }
  return out;
}

void Network::copy_params_from(const Network& other) {
  if (other.weights_.size() != weights_.size()) {
    throw ConfigError("copy_params_from: layer count mismatch");
  }
  for (size_t i = 0; i < weights_.size(); ++i) {
    if (!weights_[i].same_shape(other.weights_[i])) {
      throw ConfigError("copy_params_from: parameter shape mismatch");
    }
    weights_[i].data = other.weights_[i].data;
    biases_[i].data = other.biases_[i].data;
  }
}

uint64_t Network::param_hash() const {
  uint64_t h = 14695981039346656037ull;
  for (const Tensor* t : params()) {
    h = fnv1a(t->data.data(), t->data.size() * sizeof(float), h);
  }
  return h;
}

int64_t Network::param_count() const {
  int64_t n = 0;
  for (const Tensor* t : params()) n += t->numel();
  return n;
}

}  // namespace goalex
