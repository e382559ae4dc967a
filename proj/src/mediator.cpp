#include "gamelab/mediator.hpp"

#include <algorithm>
#include <cmath>

namespace gamelab {

Penalty penalty_from_string(const std::string& s) {
  if (s == "relu_of_sum") return Penalty::kReluOfSum;
  if (s == "sum_of_relus") return Penalty::kSumOfRelus;
  if (s == "squared") return Penalty::kSquared;
  throw ConfigError("penalty: unknown value '" + s + "'");
}

std::string to_string(Penalty p) {
  switch (p) {
    case Penalty::kReluOfSum: return "relu_of_sum";
    case Penalty::kSumOfRelus: return "sum_of_relus";
    case Penalty::kSquared: return "squared";
  }
  return "?";
}

GainMatrices marginal_gains(const Vec& u_pi, const Vec& u_d) {
  if (u_pi.size() != u_d.size() || u_pi.empty())
    throw PreconditionError("marginal_gains: loss vectors must have equal nonzero length");
  int k = static_cast<int>(u_pi.size());
  GainMatrices g;
  g.k = k;
  g.g_pi.resize(static_cast<size_t>(k) * k);
  g.g_d.resize(static_cast<size_t>(k) * k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      g.g_pi[static_cast<size_t>(i) * k + j] = u_pi[j] - u_pi[i];
      g.g_d[static_cast<size_t>(i) * k + j] = u_d[j] - u_d[i];
    }
  return g;
}

double mediator_reward(const GainMatrices& gains, Penalty penalty) {
  double acc = 0;
  size_t n = gains.g_pi.size();
  switch (penalty) {
    case Penalty::kReluOfSum:
      for (size_t i = 0; i < n; ++i) acc += std::max(0.0, gains.g_pi[i] + gains.g_d[i]);
      break;
    case Penalty::kSumOfRelus:
      for (size_t i = 0; i < n; ++i)
        acc += std::max(0.0, gains.g_pi[i]) + std::max(0.0, gains.g_d[i]);
      break;
    case Penalty::kSquared:
      for (size_t i = 0; i < n; ++i)
        acc += gains.g_pi[i] * gains.g_pi[i] + gains.g_d[i] * gains.g_d[i];
      break;
  }
  return -acc;
}

Var mediator_reward(Tape& tape, Var u_pi, Var u_d, Penalty penalty) {
  int k = tape.size(u_pi);
  if (tape.size(u_d) != k) throw PreconditionError("mediator_reward: length mismatch");

  if (penalty == Penalty::kSquared) {
    // sum_{i,j} (u_j - u_i)^2 = 2k sum u^2 - 2 (sum u)^2
    auto pair_sq = [&](Var u) {
      return tape.scale(sum(square(u)), 2.0 * k) - tape.scale(square(sum(u)), 2.0);
    };
    return -(pair_sq(u_pi) + pair_sq(u_d));
  }

  Var acc{};
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      if (i == j) continue;
      Var gp = slice_rows(u_pi, j, 1) - slice_rows(u_pi, i, 1);
      Var gd = slice_rows(u_d, j, 1) - slice_rows(u_d, i, 1);
      Var term = penalty == Penalty::kReluOfSum ? relu(gp + gd) : relu(gp) + relu(gd);
      acc = acc.valid() ? acc + term : term;
    }
  }
  return -acc;
}

MediatorPolicy::MediatorPolicy(const MediatorConfig& cfg, Rng& rng) : cfg_(cfg) {
  if (cfg.input_dim < 1 || cfg.code_size < 1)
    throw ConfigError("mediator: input_dim and code_size must be >= 1");
  std::vector<int> widths{cfg.input_dim};
  for (int l = 0; l < cfg.hidden_layers; ++l) widths.push_back(cfg.hidden_width);
  widths.push_back(2 * cfg.code_size);
  spec_ = MlpSpec{widths, Act::kTanh};
  // Near-zero head so early codes barely perturb the game.
  params_ = mlp_init(spec_, rng, 0.01).values;
}

GaussianHead MediatorPolicy::head(const Vec& info) const {
  if (static_cast<int>(info.size()) != cfg_.input_dim)
    throw ConfigError("mediator: info dimension does not match policy input");
  return gaussian_head_eval(spec_, params_, info, cfg_.init_log_std);
}

MediatorPolicy::Emission MediatorPolicy::emit_code(const Vec& info, CodeMode mode,
                                                   Rng& rng) const {
  GaussianHead h = head(info);
  Emission e;
  if (mode == CodeMode::kMean) {
    e.code = h.mean;
    e.log_prob = gaussian_log_prob(h, h.mean);
  } else {
    e.eps = rng.normal_vec(cfg_.code_size);
    auto [c, lp] = gaussian_reparam_apply(h, e.eps);
    e.code = std::move(c);
    e.log_prob = lp;
  }
  return e;
}

std::pair<Var, Var> MediatorPolicy::head_on_tape(Tape& tape, Var params,
                                                 const Vec& info) const {
  if (static_cast<int>(info.size()) != cfg_.input_dim)
    throw ConfigError("mediator: info dimension does not match policy input");
  return gaussian_head_on_tape(tape, params, spec_, info, cfg_.init_log_std);
}

void MediatorPolicy::score_update(const Vec& info, const Vec& code, double advantage,
                                  double lr) {
  Tape tape;
  Var psi = tape.leaf(params_);
  auto [mean, log_std] = head_on_tape(tape, psi, info);
  Var lp = gaussian_log_prob(tape, mean, log_std, code);
  tape.backward(lp);
  Vec g = tape.adjoint(psi);
  require_finite(g, "mediator score_update gradient");
  axpy(lr * advantage, g, params_);
  require_finite(params_, "mediator score_update");
}

void MediatorPolicy::score_update_batch(const std::vector<Vec>& infos,
                                        const std::vector<Vec>& codes, double advantage,
                                        double lr) {
  if (infos.empty() || infos.size() != codes.size())
    throw PreconditionError("mediator score_update_batch: batch mismatch");
  Tape tape;
  Var psi = tape.leaf(params_);
  Var acc{};
  for (size_t i = 0; i < infos.size(); ++i) {
    auto [mean, log_std] = head_on_tape(tape, psi, infos[i]);
    Var lp = gaussian_log_prob(tape, mean, log_std, codes[i]);
    acc = acc.valid() ? acc + lp : lp;
  }
  tape.backward(tape.scale(acc, 1.0 / static_cast<double>(infos.size())));
  Vec g = tape.adjoint(psi);
  require_finite(g, "mediator score_update_batch gradient");
  axpy(lr * advantage, g, params_);
  require_finite(params_, "mediator score_update_batch");
}

void MediatorPolicy::pathwise_update(const Vec& info,
                                     const std::function<Var(Tape&, Var)>& reward_fn,
                                     const Vec* eps, double lr) {
  Tape tape;
  Var psi = tape.leaf(params_);
  auto [mean, log_std] = head_on_tape(tape, psi, info);
  Var code = eps ? gaussian_reparam(tape, mean, log_std, *eps) : mean;
  Var reward = reward_fn(tape, code);
  tape.backward(reward);
  Vec g = tape.adjoint(psi);
  require_finite(g, "mediator pathwise_update gradient");
  axpy(lr, g, params_);
  require_finite(params_, "mediator pathwise_update");
}

}  // namespace gamelab
