#pragma once

#include <functional>
#include <string>

#include "gamelab/mlp.hpp"
#include "gamelab/rng.hpp"
#include "gamelab/tape.hpp"
#include "gamelab/vec.hpp"

namespace gamelab {

// Penalty applied to positive pairwise payoff gains in the mediator reward.
enum class Penalty { kReluOfSum, kSumOfRelus, kSquared };

Penalty penalty_from_string(const std::string& s);
std::string to_string(Penalty p);

enum class CodeMode { kMean, kSample };
enum class MediatorEstimator { kScore, kPathwise };

// K x K pairwise marginal payoff gains, one matrix per player:
// G[i][j] = u[j] - u[i]. Antisymmetric with zero diagonal by construction.
struct GainMatrices {
  int k = 0;
  Vec g_pi;  // row-major k*k
  Vec g_d;

  double pi(int i, int j) const { return g_pi[static_cast<size_t>(i) * k + j]; }
  double d(int i, int j) const { return g_d[static_cast<size_t>(i) * k + j]; }
};

GainMatrices marginal_gains(const Vec& u_pi, const Vec& u_d);

// Mediator reward, always <= 0 and 0 exactly when no positive gain term
// remains under the chosen penalty:
//   relu_of_sum:  -sum relu(g_pi + g_d)
//   sum_of_relus: -sum relu(g_pi) + relu(g_d)
//   squared:      -sum g_pi^2 + g_d^2
double mediator_reward(const GainMatrices& gains, Penalty penalty);

// Same reward built on a tape from the per-strategy loss vectors, for
// pathwise updates through the code.
Var mediator_reward(Tape& tape, Var u_pi, Var u_d, Penalty penalty);

struct MediatorConfig {
  int input_dim = 4;
  int code_size = 2;
  int hidden_width = 32;
  int hidden_layers = 2;
  double learning_rate = 1e-3;
  double init_log_std = -1.0;
};

// Small stochastic policy: a tanh trunk feeding a diagonal Gaussian head of
// dimension C. Trained either by score-function gradient on the scalar
// reward or pathwise through a differentiable reward of the code.
class MediatorPolicy {
 public:
  MediatorPolicy(const MediatorConfig& cfg, Rng& rng);

  struct Emission {
    Vec code;
    double log_prob = 0;
    Vec eps;  // noise used (empty in mean mode)
  };

  Emission emit_code(const Vec& info, CodeMode mode, Rng& rng) const;
  GaussianHead head(const Vec& info) const;

  // Score-function ascent: params += lr * advantage * grad log p(code | info).
  void score_update(const Vec& info, const Vec& code, double advantage, double lr);

  // Same ascent on the mean log density of a batch of (info, code) pairs,
  // sharing one reward (per-episode credit in rollouts).
  void score_update_batch(const std::vector<Vec>& infos, const std::vector<Vec>& codes,
                          double advantage, double lr);

  // Pathwise ascent on a differentiable reward of the emitted code. With
  // `eps` null the code is the head mean; otherwise the fixed-noise
  // reparameterized sample.
  void pathwise_update(const Vec& info, const std::function<Var(Tape&, Var)>& reward_fn,
                       const Vec* eps, double lr);

  const Vec& params() const { return params_; }
  const MediatorConfig& config() const { return cfg_; }

 private:
  // (mean, clamped log_std) nodes from a params node and a fixed info vector.
  std::pair<Var, Var> head_on_tape(Tape& tape, Var params, const Vec& info) const;

  MediatorConfig cfg_;
  MlpSpec spec_;
  Vec params_;
};

// Running mean, used as the score-function baseline.
class RunningMean {
 public:
  void add(double x) {
    ++n_;
    mean_ += (x - mean_) / static_cast<double>(n_);
  }
  double value() const { return mean_; }
  long count() const { return n_; }

 private:
  double mean_ = 0;
  long n_ = 0;
};

}  // namespace gamelab
