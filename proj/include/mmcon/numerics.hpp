#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mmcon/errors.hpp"

namespace mmcon {

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b);
double norm(const Vec& v);
// v / ||v||; throws ZeroNorm when ||v|| < 1e-12.
Vec normalized(const Vec& v);

// Row-major dense matrix.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<size_t>(r) * static_cast<size_t>(c), fill) {}

  double& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }
};

enum class Activation { Relu, Tanh };

const char* to_string(Activation a);
Activation activation_from_string(const std::string& s);

struct EncoderLayer {
  Matrix weight;  // out_dim x in_dim
  Vec bias;       // out_dim
};

// Small feed-forward encoder. Hidden layers are activated, the output layer
// is affine; the output is optionally L2-normalized onto the unit sphere.
struct EncoderParams {
  std::vector<EncoderLayer> layers;
  Activation activation = Activation::Tanh;
  bool normalize_output = true;

  int input_dim() const;
  int output_dim() const;
  size_t parameter_count() const;
};

// Glorot-uniform weights (s = sqrt(6/(fan_in+fan_out))), zero biases.
// dims = {input, hidden..., output}; needs at least one layer.
EncoderParams make_encoder(const std::vector<int>& dims, Activation activation,
                           bool normalize_output, std::uint64_t seed);

Vec encoder_forward(const EncoderParams& params, const Vec& x);

// activations[0] = x, activations[l+1] = layer l output (post-activation);
// output = activations.back() optionally normalized.
struct ForwardTrace {
  std::vector<Vec> activations;
  Vec output;
};

ForwardTrace encoder_forward_trace(const EncoderParams& params, const Vec& x);

struct EncoderGrads {
  std::vector<EncoderLayer> layers;  // same shapes as the parameters
};

EncoderGrads zero_grads_like(const EncoderParams& params);

// Accumulates parameter gradients into `grads`, returns the gradient w.r.t.
// the encoder input. `upstream` is dLoss/dOutput at trace.output.
Vec encoder_backward(const EncoderParams& params, const ForwardTrace& trace,
                     const Vec& upstream, EncoderGrads& grads);

struct BackwardResult {
  EncoderGrads grads;
  Vec input_grad;
};

// One-shot convenience form: runs its own forward trace.
BackwardResult encoder_backward(const EncoderParams& params, const Vec& x,
                                const Vec& upstream);

// p <- p - lr * g for every parameter. lr must be >= 0.
EncoderParams sgd_step(const EncoderParams& params, const EncoderGrads& grads,
                       double learning_rate);
void sgd_step_inplace(EncoderParams& params, const EncoderGrads& grads,
                      double learning_rate);

// Flat parameter order: per layer, weight rows then bias.
Vec flatten_parameters(const EncoderParams& params);
void assign_parameters(EncoderParams& params, const Vec& flat);
Vec flatten_gradients(const EncoderGrads& grads);

struct GradCheckReport {
  double max_relative_error = 0.0;
  Vec per_parameter_error;
  Vec numeric_gradient;
};

// Central finite differences of `loss` around `at`, compared against
// `analytic_gradient`. Relative error per coordinate is
// |analytic - numeric| / max(1e-12, |analytic| + |numeric|).
// step must lie in [1e-7, 1e-3].
GradCheckReport finite_difference_check(const std::function<double(const Vec&)>& loss,
                                        const Vec& at, const Vec& analytic_gradient,
                                        double step);

}  // namespace mmcon
