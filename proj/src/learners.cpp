#include "gamelab/learners.hpp"

#include <algorithm>
#include <cmath>

namespace gamelab {

Vec ftrl_l2_step(CumulativeGradient& g, const Vec& g_t, double eta) {
  if (g.sum.empty()) g.sum.assign(g_t.size(), 0.0);
  if (g.sum.size() != g_t.size()) throw PreconditionError("ftrl_l2_step: dimension mismatch");
  for (size_t i = 0; i < g_t.size(); ++i) g.sum[i] += g_t[i];
  Vec params = scaled(g.sum, -eta);
  require_finite(params, "ftrl_l2_step");
  return params;
}

Vec mw_step(const Vec& mu, const Vec& losses, double eta) {
  if (mu.size() != losses.size()) throw PreconditionError("mw_step: dimension mismatch");
  require_finite(losses, "mw_step losses");
  // Shift by the min loss so the exponentials stay in range.
  double lo = *std::min_element(losses.begin(), losses.end());
  Vec w(mu.size());
  double z = 0;
  for (size_t i = 0; i < mu.size(); ++i) {
    w[i] = mu[i] * std::exp(-eta * (losses[i] - lo));
    z += w[i];
  }
  if (!(z > 0) || !std::isfinite(z)) throw NumericError("mw_step: degenerate weights");
  for (auto& x : w) x /= z;
  return w;
}

Vec ftpl_perturbation(int dim, const LearnerConfig& cfg, Rng& rng) {
  Vec sigma(static_cast<size_t>(dim));
  for (auto& s : sigma) {
    s = sample_exponential(cfg.ftpl_zeta, rng);
    if (cfg.ftpl_sign_symmetric && rng.uniform() < 0.5) s = -s;
  }
  return sigma;
}

Vec ftpl_step(const ScalarFn& cumulative_loss, const Vec& theta_prev, const Vec& sigma,
              const LearnerConfig& cfg) {
  if (sigma.size() != theta_prev.size()) throw PreconditionError("ftpl_step: sigma dimension");
  Vec theta = theta_prev;
  const double b = cfg.ftpl_box;
  for (int s = 0; s < cfg.ftpl_inner_steps; ++s) {
    Vec g = grad(cumulative_loss, theta);
    for (size_t i = 0; i < theta.size(); ++i) {
      theta[i] -= cfg.ftpl_inner_lr * (g[i] + sigma[i]);
      theta[i] = std::min(b, std::max(-b, theta[i]));
    }
  }
  require_finite(theta, "ftpl_step");
  return theta;
}

Vec ftl_queue_step(const ParamGame& game, Role role, const Vec& own,
                   const HistoryQueue<Vec>& opponent_queue, const Vec& code,
                   const GameRound& round, double eta) {
  if (opponent_queue.empty()) throw PreconditionError("ftl_queue_step: empty opponent queue");

  Tape tape;
  Var self = tape.leaf(own);
  Var c = code.empty() ? Var{} : tape.leaf(code);
  Var total{};
  for (const Vec& opp : opponent_queue) {
    Var o = tape.leaf(opp);
    Var term = role == Role::kAgent ? game.loss_pi(tape, self, o, c, round)
                                    : game.loss_d(tape, o, self, c, round);
    total = total.valid() ? total + term : term;
  }
  tape.backward(total);
  Vec g = tape.adjoint(self);
  Vec next = own;
  axpy(-eta, g, next);
  require_finite(next, "ftl_queue_step");
  return next;
}

namespace {

void check_simplex(const Vec& mu, const char* who) {
  double s = 0;
  for (double x : mu) {
    if (!(x > 0)) throw PreconditionError(std::string(who) + ": strategy must be interior");
    s += x;
  }
  if (std::fabs(s - 1.0) > 1e-9)
    throw PreconditionError(std::string(who) + ": strategy must lie on the simplex");
}

Vec replicator_field(const Vec& mu, const Vec& losses) {
  // Fitness is the negated marginal loss; d mu_k = mu_k (f_k - mean fitness).
  double avg = 0;
  for (size_t k = 0; k < mu.size(); ++k) avg += mu[k] * (-losses[k]);
  Vec d(mu.size());
  for (size_t k = 0; k < mu.size(); ++k) d[k] = mu[k] * (-losses[k] - avg);
  return d;
}

}  // namespace

std::pair<Vec, Vec> replicator_rhs(const MatrixGame& game, const Vec& mu_pi, const Vec& mu_d) {
  check_simplex(mu_pi, "replicator_rhs (agent)");
  check_simplex(mu_d, "replicator_rhs (discriminator)");
  Vec u_pi = game.agent_loss_vec(mu_d);
  Vec u_d = game.disc_loss_vec(mu_pi);
  return {replicator_field(mu_pi, u_pi), replicator_field(mu_d, u_d)};
}

Vec rk4_step(const std::function<Vec(const Vec&)>& rhs, const Vec& x, double h) {
  Vec k1 = rhs(x);
  Vec x2 = x;
  axpy(h / 2, k1, x2);
  Vec k2 = rhs(x2);
  Vec x3 = x;
  axpy(h / 2, k2, x3);
  Vec k3 = rhs(x3);
  Vec x4 = x;
  axpy(h, k3, x4);
  Vec k4 = rhs(x4);
  Vec out = x;
  for (size_t i = 0; i < x.size(); ++i)
    out[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  return out;
}

ReplicatorFlow rk4_integrate(const MatrixGame& game, const Vec& mu_pi0, const Vec& mu_d0,
                             double step, double horizon) {
  if (!(step > 0)) throw PreconditionError("rk4_integrate: step must be > 0");
  size_t na = mu_pi0.size();
  auto rhs = [&](const Vec& state) {
    Vec pi(state.begin(), state.begin() + na);
    Vec d(state.begin() + na, state.end());
    auto [dpi, dd] = replicator_rhs(game, pi, d);
    return concat(dpi, dd);
  };

  ReplicatorFlow flow;
  Vec pi = mu_pi0, d = mu_d0;
  flow.trajectory.push_back({pi, d});
  long n_steps = static_cast<long>(std::llround(horizon / step));
  for (long t = 0; t < n_steps; ++t) {
    Vec next = rk4_step(rhs, concat(pi, d), step);
    Vec npi(next.begin(), next.begin() + na);
    Vec nd(next.begin() + na, next.end());
    for (Vec* mu : {&npi, &nd}) {
      double s = 0;
      for (double x : *mu) s += x;
      double drift = std::fabs(s - 1.0);
      flow.max_drift = std::max(flow.max_drift, drift);
      if (drift > 1e-6) throw NumericError("rk4_integrate: state left the simplex");
      for (auto& x : *mu) x /= s;
    }
    pi = std::move(npi);
    d = std::move(nd);
    flow.trajectory.push_back({pi, d});
  }
  return flow;
}

double external_regret(const MatrixGame& game,
                       const std::vector<std::pair<Vec, Vec>>& plays, Role role) {
  if (plays.empty()) throw PreconditionError("external_regret: empty history");
  double realized = 0;
  int n_fixed = role == Role::kAgent ? game.agent_actions() : game.disc_actions();
  Vec fixed(static_cast<size_t>(n_fixed), 0.0);
  for (const auto& [mu_pi, mu_d] : plays) {
    Vec u = role == Role::kAgent ? game.agent_loss_vec(mu_d) : game.disc_loss_vec(mu_pi);
    const Vec& own = role == Role::kAgent ? mu_pi : mu_d;
    realized += dot(own, u);
    for (int k = 0; k < n_fixed; ++k) fixed[k] += u[k];
  }
  return realized - *std::min_element(fixed.begin(), fixed.end());
}

double external_regret_box(const std::vector<std::pair<Vec, Vec>>& plays, double box,
                           Role role) {
  if (plays.empty()) throw PreconditionError("external_regret_box: empty history");
  PenniesGame game;
  double realized = 0;
  Vec cum_grad(2, 0.0);  // gradient of the cumulative loss in own strategy
  for (const auto& [phi, omega] : plays) {
    double l = game.loss_pi_value(phi, omega, {}, {});
    if (role == Role::kAgent) {
      realized += l;
      // grad_phi phi^T A omega = A omega
      cum_grad[0] += omega[0] - omega[1];
      cum_grad[1] += omega[1] - omega[0];
    } else {
      realized += -l;
      // grad_omega (-phi^T A omega) = -A^T phi
      cum_grad[0] += phi[1] - phi[0];
      cum_grad[1] += phi[0] - phi[1];
    }
  }
  // Best fixed strategy of a linear objective over the box is a corner.
  double best = -box * (std::fabs(cum_grad[0]) + std::fabs(cum_grad[1]));
  return realized - best;
}

}  // namespace gamelab
