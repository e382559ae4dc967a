#pragma once

#include <deque>
#include <functional>
#include <utility>
#include <vector>

#include "gamelab/games.hpp"
#include "gamelab/rng.hpp"
#include "gamelab/tape.hpp"
#include "gamelab/vec.hpp"

namespace gamelab {

// Bounded FIFO of strategy snapshots; when full, the oldest is evicted.
template <typename T>
class HistoryQueue {
 public:
  explicit HistoryQueue(int capacity) : cap_(capacity) {
    if (capacity < 1) throw ConfigError("HistoryQueue: capacity must be >= 1");
  }

  void insert(T item) {
    items_.push_back(std::move(item));
    if (static_cast<int>(items_.size()) > cap_) items_.pop_front();
  }

  int size() const { return static_cast<int>(items_.size()); }
  int capacity() const { return cap_; }
  bool empty() const { return items_.empty(); }
  const T& operator[](int i) const { return items_[static_cast<size_t>(i)]; }
  auto begin() const { return items_.begin(); }
  auto end() const { return items_.end(); }

 private:
  std::deque<T> items_;
  int cap_;
};

struct LearnerConfig {
  double eta = 0.01;          // player learning rate
  double reg_weight = 1.0;    // regularizer weight (where applicable)
  double ftpl_zeta = 1.0;     // exponential noise rate
  double ftpl_box = 5.0;      // oracle box half-width
  int ftpl_inner_steps = 50;  // projected gradient steps per round
  double ftpl_inner_lr = 0.01;
  bool ftpl_sign_symmetric = false;  // one-sided Exp noise by default
  int queue_size = 5;         // K
  int code_size = 2;          // C
};

// Running sum of per-round loss gradients for one player.
struct CumulativeGradient {
  Vec sum;
};

// Lazy linearized follow-the-regularized-leader with l2 regularizer:
// accumulates g_t into G and returns the closed-form argmin -eta * G.
Vec ftrl_l2_step(CumulativeGradient& g, const Vec& g_t, double eta);

// Multiplicative weights: mu'(k) proportional to mu(k) * exp(-eta * u(k)).
Vec mw_step(const Vec& mu, const Vec& losses, double eta);

// Follow-the-perturbed-leader round: approximately minimize
//   cumulative_loss(theta) + sigma . theta
// over the box [-B, B]^d with `inner_steps` projected gradient steps warm
// started at theta_prev. `cumulative_loss` builds the summed history loss on
// the given tape.
Vec ftpl_step(const ScalarFn& cumulative_loss, const Vec& theta_prev, const Vec& sigma,
              const LearnerConfig& cfg);

// Fresh perturbation vector for one FTPL round.
Vec ftpl_perturbation(int dim, const LearnerConfig& cfg, Rng& rng);

// One follow-the-leader gradient step against every queued opponent snapshot
// at the current code:
//   phi' = phi - eta * grad_phi sum_{omega in queue} loss(phi, omega, c).
Vec ftl_queue_step(const ParamGame& game, Role role, const Vec& own,
                   const HistoryQueue<Vec>& opponent_queue, const Vec& code,
                   const GameRound& round, double eta);

// Replicator flow for a finite zero-sum game. Each action's probability
// grows in proportion to its payoff advantage over the mixture average;
// payoff here is the negated marginal loss, matching the multiplicative
// weights direction.
std::pair<Vec, Vec> replicator_rhs(const MatrixGame& game, const Vec& mu_pi, const Vec& mu_d);

struct ReplicatorFlow {
  std::vector<std::pair<Vec, Vec>> trajectory;  // includes the initial state
  double max_drift = 0;  // largest |sum(mu) - 1| seen before renormalization
};

// Classical RK4 over the replicator field; per-player probabilities are
// renormalized after each step and the pre-normalization drift recorded.
// Throws NumericError if the state leaves the simplex by more than 1e-6.
ReplicatorFlow rk4_integrate(const MatrixGame& game, const Vec& mu_pi0, const Vec& mu_d0,
                             double step, double horizon);

// Generic RK4 step (exposed for convergence-order checks).
Vec rk4_step(const std::function<Vec(const Vec&)>& rhs, const Vec& x, double h);

// External regret of one player over a history of mixed-strategy plays in a
// finite game, via exact enumeration of fixed actions.
double external_regret(const MatrixGame& game,
                       const std::vector<std::pair<Vec, Vec>>& plays, Role role);

// External regret for the continuous pennies games over the box [-B, B]^2;
// the best fixed strategy of the bilinear form is a box corner.
double external_regret_box(const std::vector<std::pair<Vec, Vec>>& plays, double box,
                           Role role);

}  // namespace gamelab
