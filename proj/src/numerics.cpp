#include "mmcon/numerics.hpp"

#include <cmath>
#include <random>

namespace mmcon {

double dot(const Vec& a, const Vec& b) {
  if (a.size() != b.size())
    throw DimensionMismatch("dot: vector lengths differ (" + std::to_string(a.size()) +
                            " vs " + std::to_string(b.size()) + ")");
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const Vec& v) { return std::sqrt(dot(v, v)); }

Vec normalized(const Vec& v) {
  const double n = norm(v);
  if (n < 1e-12) throw ZeroNorm("normalized: vector norm below 1e-12");
  Vec out(v.size());
  for (size_t i = 0; i < v.size(); ++i) out[i] = v[i] / n;
  return out;
}

const char* to_string(Activation a) {
  return a == Activation::Relu ? "relu" : "tanh";
}

Activation activation_from_string(const std::string& s) {
  if (s == "relu") return Activation::Relu;
  if (s == "tanh") return Activation::Tanh;
  throw InvalidConfig("unknown activation '" + s + "' (expected relu|tanh)");
}

int EncoderParams::input_dim() const {
  return layers.empty() ? 0 : layers.front().weight.cols;
}

int EncoderParams::output_dim() const {
  return layers.empty() ? 0 : layers.back().weight.rows;
}

size_t EncoderParams::parameter_count() const {
  size_t n = 0;
  for (const auto& l : layers) n += l.weight.data.size() + l.bias.size();
  return n;
}

EncoderParams make_encoder(const std::vector<int>& dims, Activation activation,
                           bool normalize_output, std::uint64_t seed) {
  if (dims.size() < 2) throw InvalidConfig("make_encoder: need at least input and output dims");
  for (int d : dims)
    if (d <= 0) throw InvalidConfig("make_encoder: all dimensions must be positive");

  EncoderParams params;
  params.activation = activation;
  params.normalize_output = normalize_output;
  std::mt19937_64 rng(seed);
  for (size_t l = 0; l + 1 < dims.size(); ++l) {
    const int fan_in = dims[l];
    const int fan_out = dims[l + 1];
    const double s = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> u(-s, s);
    EncoderLayer layer;
    layer.weight = Matrix(fan_out, fan_in);
    for (double& w : layer.weight.data) w = u(rng);
    layer.bias.assign(static_cast<size_t>(fan_out), 0.0);
    params.layers.push_back(std::move(layer));
  }
  return params;
}

namespace {

void check_layer_chain(const EncoderParams& params) {
  if (params.layers.empty()) throw InvalidConfig("encoder has no layers");
  for (size_t l = 0; l + 1 < params.layers.size(); ++l) {
    if (params.layers[l].weight.rows != params.layers[l + 1].weight.cols)
      throw DimensionMismatch("encoder layer dimensions do not compose at layer " +
                              std::to_string(l));
  }
  for (const auto& l : params.layers) {
    if (static_cast<int>(l.bias.size()) != l.weight.rows)
      throw DimensionMismatch("encoder bias length does not match layer rows");
  }
}

Vec affine(const EncoderLayer& layer, const Vec& x) {
  Vec out(static_cast<size_t>(layer.weight.rows));
  for (int r = 0; r < layer.weight.rows; ++r) {
    double s = layer.bias[static_cast<size_t>(r)];
    const double* wrow = &layer.weight.data[static_cast<size_t>(r) * layer.weight.cols];
    for (int c = 0; c < layer.weight.cols; ++c) s += wrow[c] * x[static_cast<size_t>(c)];
    out[static_cast<size_t>(r)] = s;
  }
  return out;
}

void apply_activation(Activation act, Vec& v) {
  if (act == Activation::Relu) {
    for (double& x : v) x = x > 0.0 ? x : 0.0;
  } else {
    for (double& x : v) x = std::tanh(x);
  }
}

// Derivative expressed through the post-activation value.
double activation_deriv(Activation act, double activated) {
  if (act == Activation::Relu) return activated > 0.0 ? 1.0 : 0.0;
  return 1.0 - activated * activated;
}

}  // namespace

ForwardTrace encoder_forward_trace(const EncoderParams& params, const Vec& x) {
  check_layer_chain(params);
  if (static_cast<int>(x.size()) != params.input_dim())
    throw DimensionMismatch("encoder_forward: input length " + std::to_string(x.size()) +
                            " does not match first layer input dim " +
                            std::to_string(params.input_dim()));

  ForwardTrace trace;
  trace.activations.reserve(params.layers.size() + 1);
  trace.activations.push_back(x);
  for (size_t l = 0; l < params.layers.size(); ++l) {
    Vec next = affine(params.layers[l], trace.activations.back());
    if (l + 1 < params.layers.size()) apply_activation(params.activation, next);
    trace.activations.push_back(std::move(next));
  }

  const Vec& pre_norm = trace.activations.back();
  if (params.normalize_output) {
    const double n = norm(pre_norm);
    if (n < 1e-12)
      throw DegenerateEmbedding("encoder output norm below 1e-12, cannot normalize");
    trace.output.resize(pre_norm.size());
    for (size_t i = 0; i < pre_norm.size(); ++i) trace.output[i] = pre_norm[i] / n;
  } else {
    trace.output = pre_norm;
  }
  return trace;
}

Vec encoder_forward(const EncoderParams& params, const Vec& x) {
  return encoder_forward_trace(params, x).output;
}

EncoderGrads zero_grads_like(const EncoderParams& params) {
  EncoderGrads g;
  g.layers.reserve(params.layers.size());
  for (const auto& l : params.layers) {
    EncoderLayer zl;
    zl.weight = Matrix(l.weight.rows, l.weight.cols);
    zl.bias.assign(l.bias.size(), 0.0);
    g.layers.push_back(std::move(zl));
  }
  return g;
}

Vec encoder_backward(const EncoderParams& params, const ForwardTrace& trace,
                     const Vec& upstream, EncoderGrads& grads) {
  check_layer_chain(params);
  if (grads.layers.size() != params.layers.size())
    throw DimensionMismatch("encoder_backward: gradient buffer shape mismatch");
  if (trace.activations.size() != params.layers.size() + 1)
    throw DimensionMismatch("encoder_backward: trace does not match parameter layers");
  if (upstream.size() != trace.output.size())
    throw DimensionMismatch("encoder_backward: upstream length does not match output");

  // Through the optional L2 normalization: z = h/||h||,
  // dL/dh = (g - (z.g) z) / ||h||.
  Vec g = upstream;
  if (params.normalize_output) {
    const Vec& h = trace.activations.back();
    const double n = norm(h);
    if (n < 1e-12)
      throw DegenerateEmbedding("encoder_backward: output norm below 1e-12");
    const Vec& z = trace.output;
    const double zg = dot(z, g);
    for (size_t i = 0; i < g.size(); ++i) g[i] = (g[i] - zg * z[i]) / n;
  }

  for (int l = static_cast<int>(params.layers.size()) - 1; l >= 0; --l) {
    const EncoderLayer& layer = params.layers[static_cast<size_t>(l)];
    const Vec& in = trace.activations[static_cast<size_t>(l)];
    const Vec& out = trace.activations[static_cast<size_t>(l) + 1];

    if (static_cast<size_t>(l) + 1 < params.layers.size()) {
      for (size_t i = 0; i < g.size(); ++i)
        g[i] *= activation_deriv(params.activation, out[i]);
    }

    EncoderLayer& gl = grads.layers[static_cast<size_t>(l)];
    for (int r = 0; r < layer.weight.rows; ++r) {
      const double gr = g[static_cast<size_t>(r)];
      double* grow = &gl.weight.data[static_cast<size_t>(r) * layer.weight.cols];
      for (int c = 0; c < layer.weight.cols; ++c) grow[c] += gr * in[static_cast<size_t>(c)];
      gl.bias[static_cast<size_t>(r)] += gr;
    }

    Vec g_in(static_cast<size_t>(layer.weight.cols), 0.0);
    for (int r = 0; r < layer.weight.rows; ++r) {
      const double gr = g[static_cast<size_t>(r)];
      const double* wrow = &layer.weight.data[static_cast<size_t>(r) * layer.weight.cols];
      for (int c = 0; c < layer.weight.cols; ++c) g_in[static_cast<size_t>(c)] += gr * wrow[c];
    }
    g = std::move(g_in);
  }
  return g;
}

BackwardResult encoder_backward(const EncoderParams& params, const Vec& x,
                                const Vec& upstream) {
  BackwardResult res;
  res.grads = zero_grads_like(params);
  const ForwardTrace trace = encoder_forward_trace(params, x);
  res.input_grad = encoder_backward(params, trace, upstream, res.grads);
  return res;
}

void sgd_step_inplace(EncoderParams& params, const EncoderGrads& grads,
                      double learning_rate) {
  if (learning_rate < 0.0) throw InvalidConfig("sgd_step: negative learning rate");
  if (grads.layers.size() != params.layers.size())
    throw DimensionMismatch("sgd_step: layer count mismatch");
  for (size_t l = 0; l < params.layers.size(); ++l) {
    EncoderLayer& p = params.layers[l];
    const EncoderLayer& g = grads.layers[l];
    if (p.weight.rows != g.weight.rows || p.weight.cols != g.weight.cols ||
        p.bias.size() != g.bias.size())
      throw DimensionMismatch("sgd_step: gradient shape mismatch at layer " + std::to_string(l));
    for (size_t i = 0; i < p.weight.data.size(); ++i)
      p.weight.data[i] -= learning_rate * g.weight.data[i];
    for (size_t i = 0; i < p.bias.size(); ++i) p.bias[i] -= learning_rate * g.bias[i];
  }
}

EncoderParams sgd_step(const EncoderParams& params, const EncoderGrads& grads,
                       double learning_rate) {
  EncoderParams out = params;
  sgd_step_inplace(out, grads, learning_rate);
  return out;
}

Vec flatten_parameters(const EncoderParams& params) {
  Vec flat;
  flat.reserve(params.parameter_count());
  for (const auto& l : params.layers) {
    flat.insert(flat.end(), l.weight.data.begin(), l.weight.data.end());
    flat.insert(flat.end(), l.bias.begin(), l.bias.end());
  }
  return flat;
}

void assign_parameters(EncoderParams& params, const Vec& flat) {
  if (flat.size() != params.parameter_count())
    throw DimensionMismatch("assign_parameters: flat length " + std::to_string(flat.size()) +
                            " does not match parameter count " +
                            std::to_string(params.parameter_count()));
  size_t pos = 0;
  for (auto& l : params.layers) {
    for (double& w : l.weight.data) w = flat[pos++];
    for (double& b : l.bias) b = flat[pos++];
  }
}

Vec flatten_gradients(const EncoderGrads& grads) {
  Vec flat;
  for (const auto& l : grads.layers) {
    flat.insert(flat.end(), l.weight.data.begin(), l.weight.data.end());
    flat.insert(flat.end(), l.bias.begin(), l.bias.end());
  }
  return flat;
}

GradCheckReport finite_difference_check(const std::function<double(const Vec&)>& loss,
                                        const Vec& at, const Vec& analytic_gradient,
                                        double step) {
  if (step < 1e-7 || step > 1e-3)
    throw InvalidConfig("finite_difference_check: step must lie in [1e-7, 1e-3]");
  if (at.size() != analytic_gradient.size())
    throw DimensionMismatch("finite_difference_check: gradient length mismatch");

  GradCheckReport report;
  report.per_parameter_error.resize(at.size());
  report.numeric_gradient.resize(at.size());

  Vec probe = at;
  for (size_t i = 0; i < at.size(); ++i) {
    probe[i] = at[i] + step;
    const double f_plus = loss(probe);
    probe[i] = at[i] - step;
    const double f_minus = loss(probe);
    probe[i] = at[i];
    if (!std::isfinite(f_plus) || !std::isfinite(f_minus))
      throw NonFiniteLoss("finite_difference_check: perturbed loss is not finite at parameter " +
                          std::to_string(i));
    const double numeric = (f_plus - f_minus) / (2.0 * step);
    const double analytic = analytic_gradient[i];
    const double denom = std::max(1e-12, std::abs(analytic) + std::abs(numeric));
    const double rel = std::abs(analytic - numeric) / denom;
    report.numeric_gradient[i] = numeric;
    report.per_parameter_error[i] = rel;
    if (rel > report.max_relative_error) report.max_relative_error = rel;
  }
  return report;
}

}  // namespace mmcon
