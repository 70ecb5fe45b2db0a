#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "goalex/rng.hpp"
#include "goalex/tensor.hpp"

namespace goalex {

enum class Activation { None, Relu, Tanh };

struct LayerSpec {
  enum class Kind { Conv, Dense };
  Kind kind = Kind::Dense;
  int out = 0;     // conv: output channels; dense: output dim
  int kernel = 0;  // conv only (square, valid padding)
  int stride = 0;  // conv only
  Activation act = Activation::None;
};

// Ordered layer descriptors, parsed from strings like
// "conv:8:4:2:relu,conv:16:3:2:relu,dense:64:relu,dense:3:tanh".
struct NetworkSpec {
  std::vector<LayerSpec> layers;

  static NetworkSpec parse(const std::string& text);
  std::string to_string() const;
};

// Per-sample image shape, NHWC order in batches.
struct Shape3 {
  int h = 0, w = 0, c = 0;
  int64_t numel() const { return static_cast<int64_t>(h) * w * c; }
  bool operator==(const Shape3&) const = default;
};

// Feed-forward network: conv stack followed by dense layers. An optional
// auxiliary vector input (e.g. the action fed to a critic) is concatenated
// with the flattened features at the first dense layer.
class Network {
 public:
  Network(const NetworkSpec& spec, Shape3 input, int aux_dim, Rng& init_rng);

  struct Trace {
    Tensor input;               // [N,H,W,C]
    Tensor aux;                 // [N,aux_dim] or empty
    std::vector<Tensor> outs;   // post-activation output per layer
    std::vector<Tensor> cols;   // im2col buffer per conv layer
    Tensor dense0_in;           // concat(flatten, aux) when aux_dim > 0
    int batch = 0;
  };

  struct Gradients {
    std::vector<Tensor> weight;
    std::vector<Tensor> bias;
    Tensor input;  // [N,H,W,C]
    Tensor aux;    // [N,aux_dim] or empty
  };

  // x: [N,H,W,C] matching input shape; aux: [N,aux_dim] when aux_dim > 0.
  Tensor forward(const Tensor& x, const Tensor* aux = nullptr) const;
  Tensor forward(const Tensor& x, const Tensor* aux, Trace* trace) const;

  // upstream: [N,out_dim] gradient at the output.
  Gradients backward(const Trace& trace, const Tensor& upstream) const;

  std::vector<Tensor*> params();
  std::vector<const Tensor*> params() const;
  static std::vector<const Tensor*> grad_ptrs(const Gradients& g);

  void copy_params_from(const Network& other);
  uint64_t param_hash() const;
  int64_t param_count() const;

  const NetworkSpec& spec() const { return spec_; }
  Shape3 input_shape() const { return input_; }
  int aux_dim() const { return aux_dim_; }
  int out_dim() const { return out_dim_; }

  const Tensor& weight(int layer) const { return weights_[static_cast<size_t>(layer)]; }
  const Tensor& bias(int layer) const { return biases_[static_cast<size_t>(layer)]; }
  Tensor& mutable_weight(int layer) { return weights_[static_cast<size_t>(layer)]; }
  Tensor& mutable_bias(int layer) { return biases_[static_cast<size_t>(layer)]; }

 private:
  NetworkSpec spec_;
  Shape3 input_;
  int aux_dim_ = 0;
  int out_dim_ = 0;
  int first_dense_ = -1;            // layer index where flattening happens
  std::vector<Shape3> out_shapes_;  // conv layers; dense stored as {1,1,out}
  std::vector<int> in_dims_;        // dense layers: input dim (incl. aux)
  std::vector<Tensor> weights_;
  std::vector<Tensor> biases_;
};

const char* activation_name(Activation a);

}  // namespace goalex
