#include "gamelab/mlp.hpp"

#include <cmath>

namespace gamelab {

namespace {
constexpr double kHalfLog2Pi = 0.91893853320467274178;  // 0.5 * ln(2*pi)
}

int mlp_param_count(const MlpSpec& spec) {
  if (spec.widths.size() < 2) throw ConfigError("mlp: need at least input and output widths");
  int n = 0;
  for (size_t l = 0; l + 1 < spec.widths.size(); ++l)
    n += spec.widths[l + 1] * spec.widths[l] + spec.widths[l + 1];
  return n;
}

MlpParams mlp_init(const MlpSpec& spec, Rng& rng, double out_scale) {
  MlpParams p{spec, Vec(static_cast<size_t>(mlp_param_count(spec)))};
  size_t off = 0;
  for (size_t l = 0; l + 1 < spec.widths.size(); ++l) {
    int in = spec.widths[l], out = spec.widths[l + 1];
    bool last = (l + 2 == spec.widths.size());
    double s = std::sqrt(2.0 / (in + out)) * (last ? out_scale : 1.0);
    for (int i = 0; i < out * in; ++i) p.values[off++] = s * rng.normal();
    for (int i = 0; i < out; ++i) p.values[off++] = 0.0;  // biases start at zero
  }
  return p;
}

Var mlp_forward(Tape& tape, Var flat_params, const MlpSpec& spec, Var input) {
  if (tape.rows(input) != spec.input_dim())
    throw ConfigError("mlp_forward: input dimension does not match first layer");
  if (tape.size(flat_params) != mlp_param_count(spec))
    throw ConfigError("mlp_forward: parameter vector has wrong length");

  Var h = input;
  int off = 0;
  for (size_t l = 0; l + 1 < spec.widths.size(); ++l) {
    int in = spec.widths[l], out = spec.widths[l + 1];
    Var w = reshape(slice_rows(flat_params, off, out * in), out, in);
    off += out * in;
    Var b = slice_rows(flat_params, off, out);
    off += out;
    Var z = add_colvec(matmul(w, h), b);
    if (l + 2 < spec.widths.size()) {
      h = spec.hidden_act == Act::kTanh ? tanh(z)
          : spec.hidden_act == Act::kRelu ? relu(z) : z;
    } else {
      h = z;
    }
  }
  return h;
}

Vec mlp_forward(const MlpSpec& spec, const Vec& flat_params, const Vec& input) {
  if (static_cast<int>(input.size()) != spec.input_dim())
    throw ConfigError("mlp_forward: input dimension does not match first layer");
  if (static_cast<int>(flat_params.size()) != mlp_param_count(spec))
    throw ConfigError("mlp_forward: parameter vector has wrong length");

  Vec h = input;
  size_t off = 0;
  for (size_t l = 0; l + 1 < spec.widths.size(); ++l) {
    int in = spec.widths[l], out = spec.widths[l + 1];
    Vec z(static_cast<size_t>(out));
    for (int i = 0; i < out; ++i) {
      double s = 0;
      for (int j = 0; j < in; ++j) s += flat_params[off + static_cast<size_t>(i) * in + j] * h[j];
      z[i] = s;
    }
    off += static_cast<size_t>(out) * in;
    for (int i = 0; i < out; ++i) z[i] += flat_params[off + i];
    off += out;
    if (l + 2 < spec.widths.size()) {
      for (auto& x : z)
        x = spec.hidden_act == Act::kTanh ? std::tanh(x)
            : spec.hidden_act == Act::kRelu ? (x > 0 ? x : 0.0) : x;
    }
    h = std::move(z);
  }
  require_finite(h, "mlp_forward");
  return h;
}

GaussianHead split_gaussian_head(const Vec& raw) {
  if (raw.size() % 2 != 0) throw ConfigError("gaussian head: raw output must have even length");
  size_t c = raw.size() / 2;
  GaussianHead h;
  h.mean.assign(raw.begin(), raw.begin() + c);
  h.log_std.assign(raw.begin() + c, raw.end());
  for (auto& x : h.log_std) x = std::min(kLogStdMax, std::max(kLogStdMin, x));
  return h;
}

std::pair<Vec, double> gaussian_reparam_sample(const GaussianHead& head, Rng& rng) {
  return gaussian_reparam_apply(head, rng.normal_vec(static_cast<int>(head.mean.size())));
}

std::pair<Vec, double> gaussian_reparam_apply(const GaussianHead& head, const Vec& eps) {
  if (eps.size() != head.mean.size()) throw ConfigError("gaussian sample: noise length mismatch");
  Vec c(head.mean.size());
  for (size_t i = 0; i < c.size(); ++i) c[i] = head.mean[i] + std::exp(head.log_std[i]) * eps[i];
  return {c, gaussian_log_prob(head, c)};
}

double gaussian_log_prob(const GaussianHead& head, const Vec& c) {
  if (c.size() != head.mean.size()) throw ConfigError("gaussian log_prob: length mismatch");
  double lp = 0;
  for (size_t i = 0; i < c.size(); ++i) {
    double z = (c[i] - head.mean[i]) * std::exp(-head.log_std[i]);
    lp += -kHalfLog2Pi - head.log_std[i] - 0.5 * z * z;
  }
  return lp;
}

Var gaussian_log_prob(Tape& tape, Var mean, Var log_std, const Vec& c) {
  int n = tape.size(mean);
  if (static_cast<int>(c.size()) != n) throw ConfigError("gaussian log_prob: length mismatch");
  Var cv = tape.leaf(c);
  Var z = (cv - mean) * exp(-log_std);
  Var quad = sum(square(z));
  Var logdet = sum(log_std);
  return tape.add_const(tape.scale(tape.add(tape.scale(quad, 0.5), logdet), -1.0),
                        -kHalfLog2Pi * n);
}

Var gaussian_reparam(Tape& tape, Var mean, Var log_std, const Vec& eps) {
  if (static_cast<int>(eps.size()) != tape.size(mean))
    throw ConfigError("gaussian reparam: noise length mismatch");
  Var ev = tape.leaf(eps);
  return mean + exp(log_std) * ev;
}

std::pair<Var, Var> gaussian_head_on_tape(Tape& tape, Var flat_params, const MlpSpec& spec,
                                          const Vec& input, double log_std_offset) {
  int out = spec.output_dim();
  if (out % 2 != 0) throw ConfigError("gaussian head: trunk output must have even width");
  int c = out / 2;
  Var raw = mlp_forward(tape, flat_params, spec, tape.leaf(input));
  Var mean = slice_rows(raw, 0, c);
  Var log_std = clamp(tape.add_const(slice_rows(raw, c, c), log_std_offset),
                      kLogStdMin, kLogStdMax);
  return {mean, log_std};
}

GaussianHead gaussian_head_eval(const MlpSpec& spec, const Vec& flat_params, const Vec& input,
                                double log_std_offset) {
  Vec raw = mlp_forward(spec, flat_params, input);
  if (raw.size() % 2 != 0) throw ConfigError("gaussian head: trunk output must have even width");
  for (size_t i = raw.size() / 2; i < raw.size(); ++i) raw[i] += log_std_offset;
  return split_gaussian_head(raw);
}

}  // namespace gamelab
