#pragma once

#include <vector>

#include "gamelab/rng.hpp"
#include "gamelab/tape.hpp"
#include "gamelab/vec.hpp"

namespace gamelab {

enum class Act { kTanh, kRelu, kIdentity };

// Layer widths plus one activation tag shared by the hidden layers; the
// output layer is always linear.
struct MlpSpec {
  std::vector<int> widths;  // {in, h1, ..., out}
  Act hidden_act = Act::kTanh;

  int input_dim() const { return widths.front(); }
  int output_dim() const { return widths.back(); }
};

// Total parameter count for the flat layout [W0, b0, W1, b1, ...] with W_i
// stored row-major as (out x in).
int mlp_param_count(const MlpSpec& spec);

// Per-layer weight matrices and bias vectors as one flat value vector. The
// layout is fixed at construction; snapshots are plain copies of `values`.
struct MlpParams {
  MlpSpec spec;
  Vec values;
};

// Xavier-style init; `out_scale` shrinks the final layer (near-zero heads).
MlpParams mlp_init(const MlpSpec& spec, Rng& rng, double out_scale = 1.0);

// Forward pass on the tape: params and input are tape nodes, so gradients
// flow to both. `input` is (in x batch); result is (out x batch).
Var mlp_forward(Tape& tape, Var flat_params, const MlpSpec& spec, Var input);

// Plain forward pass for a single column input (no gradients).
Vec mlp_forward(const MlpSpec& spec, const Vec& flat_params, const Vec& input);

// Diagonal Gaussian output head.
struct GaussianHead {
  Vec mean;
  Vec log_std;
};

inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 2.0;

// Split a 2C-vector into (mean, log_std) with log_std clamped.
GaussianHead split_gaussian_head(const Vec& raw);

// c = mean + exp(log_std) .* eps with fresh eps ~ N(0, I); returns the code
// and its log density under the head.
std::pair<Vec, double> gaussian_reparam_sample(const GaussianHead& head, Rng& rng);

// Same with caller-supplied noise (eps = 0 gives c = mean).
std::pair<Vec, double> gaussian_reparam_apply(const GaussianHead& head, const Vec& eps);

double gaussian_log_prob(const GaussianHead& head, const Vec& c);

// Tape-side log density of a fixed sample c under (mean, log_std) nodes.
Var gaussian_log_prob(Tape& tape, Var mean, Var log_std, const Vec& c);

// Tape-side reparameterized sample with fixed noise.
Var gaussian_reparam(Tape& tape, Var mean, Var log_std, const Vec& eps);

// Gaussian policy head from a trunk whose output stacks [mean; raw log_std].
// `log_std_offset` shifts the raw log_std before clamping so freshly
// initialised heads start at a chosen noise scale.
std::pair<Var, Var> gaussian_head_on_tape(Tape& tape, Var flat_params, const MlpSpec& spec,
                                          const Vec& input, double log_std_offset);
GaussianHead gaussian_head_eval(const MlpSpec& spec, const Vec& flat_params, const Vec& input,
                                double log_std_offset);

}  // namespace gamelab
