#pragma once

#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "gamelab/mlp.hpp"
#include "gamelab/rng.hpp"
#include "gamelab/tape.hpp"
#include "gamelab/vec.hpp"

namespace gamelab {

enum class Role { kAgent, kDiscriminator };

// Per-round stochastic context (data batches for the GAN game; empty for the
// parameter games). Sampling is pure: games hold no mutable state.
struct GameRound {
  Vec real;
  Vec noise;
};

// Mediator code applied to a game. (c_pi, c_d) resolve as (0,0) with no code,
// (c[0], c[0]) for one code and (c[0], c[1]) for two.
std::pair<double, double> split_code(const Vec& code);

// Two-player game over real parameter vectors. The agent minimizes loss_pi,
// the discriminator minimizes loss_d; for zero-sum games loss_d == -loss_pi.
class ParamGame {
 public:
  virtual ~ParamGame() = default;

  virtual std::string name() const = 0;
  virtual int agent_dim() const = 0;
  virtual int disc_dim() const = 0;
  virtual bool zero_sum() const = 0;
  // Equilibrium reference (agent, discriminator) when known analytically.
  virtual std::optional<std::pair<Vec, Vec>> mne_reference() const = 0;

  virtual GameRound sample_round(Rng& rng) const {
    (void)rng;
    return {};
  }

  // Loss expressions on a caller-owned tape; `code` may be invalid (no code).
  virtual Var loss_pi(Tape& tape, Var phi, Var omega, Var code,
                      const GameRound& round) const = 0;
  virtual Var loss_d(Tape& tape, Var phi, Var omega, Var code,
                     const GameRound& round) const = 0;

  // Plain evaluations (default: build a throwaway tape).
  virtual double loss_pi_value(const Vec& phi, const Vec& omega, const Vec& code,
                               const GameRound& round) const;
  virtual double loss_d_value(const Vec& phi, const Vec& omega, const Vec& code,
                              const GameRound& round) const;
};

// Continuous matching pennies: L(phi, omega) = phi^T A omega with
// A = [[1,-1],[-1,1]]. Codes perturb the first coordinate of each player's
// effective strategy, which shifts the saddle point of the bilinear form;
// a broadcast shift would be annihilated by A (its rows and columns sum to
// zero) and leave the game untouched.
class PenniesGame : public ParamGame {
 public:
  std::string name() const override { return "pennies"; }
  int agent_dim() const override { return 2; }
  int disc_dim() const override { return 2; }
  bool zero_sum() const override { return true; }
  std::optional<std::pair<Vec, Vec>> mne_reference() const override {
    return std::make_pair(Vec{0, 0}, Vec{0, 0});
  }
  Var loss_pi(Tape& tape, Var phi, Var omega, Var code, const GameRound&) const override;
  Var loss_d(Tape& tape, Var phi, Var omega, Var code, const GameRound&) const override;
  double loss_pi_value(const Vec& phi, const Vec& omega, const Vec& code,
                       const GameRound&) const override;
  double loss_d_value(const Vec& phi, const Vec& omega, const Vec& code,
                      const GameRound&) const override;
};

// Non-convex variant: the agent keeps the bilinear loss, the discriminator
// pays ReLU(-phi^T A omega). Not zero-sum.
class ReluPenniesGame : public ParamGame {
 public:
  std::string name() const override { return "relu_pennies"; }
  int agent_dim() const override { return 2; }
  int disc_dim() const override { return 2; }
  bool zero_sum() const override { return false; }
  std::optional<std::pair<Vec, Vec>> mne_reference() const override {
    return std::make_pair(Vec{0, 0}, Vec{0, 0});
  }
  Var loss_pi(Tape& tape, Var phi, Var omega, Var code, const GameRound&) const override;
  Var loss_d(Tape& tape, Var phi, Var omega, Var code, const GameRound&) const override;
  double loss_pi_value(const Vec& phi, const Vec& omega, const Vec& code,
                       const GameRound&) const override;
  double loss_d_value(const Vec& phi, const Vec& omega, const Vec& code,
                      const GameRound&) const override;
};

struct ToyGanConfig {
  double data_mean = 2.0;
  double data_std = 0.5;
  int batch = 64;
  int code_size = 2;
  int disc_hidden = 16;
};

// 1-D GAN in the saturating zero-sum form
//   L = mean log(sigmoid(d(x, c))) + mean log(1 - sigmoid(d(g(z, c), c)))
// with loss_pi = L (generator descends) and loss_d = -L. The generator is an
// affine map of [z; c]; the discriminator is a small tanh MLP over [x; c].
class ToyGanGame : public ParamGame {
 public:
  explicit ToyGanGame(const ToyGanConfig& cfg);

  std::string name() const override { return "toygan"; }
  int agent_dim() const override { return mlp_param_count(gen_spec_); }
  int disc_dim() const override { return mlp_param_count(disc_spec_); }
  bool zero_sum() const override { return true; }
  std::optional<std::pair<Vec, Vec>> mne_reference() const override { return std::nullopt; }
  GameRound sample_round(Rng& rng) const override;
  Var loss_pi(Tape& tape, Var phi, Var omega, Var code, const GameRound& round) const override;
  Var loss_d(Tape& tape, Var phi, Var omega, Var code, const GameRound& round) const override;

  const MlpSpec& gen_spec() const { return gen_spec_; }
  const MlpSpec& disc_spec() const { return disc_spec_; }
  const ToyGanConfig& config() const { return cfg_; }

  // Generator samples at a fixed code (evaluation helper).
  Vec generate(const Vec& gen_params, const Vec& code, const Vec& noise) const;

 private:
  Var game_value(Tape& tape, Var phi, Var omega, Var code, const GameRound& round) const;

  ToyGanConfig cfg_;
  MlpSpec gen_spec_;
  MlpSpec disc_spec_;
};

// Finite two-player matrix game; entry (i, j) is the agent's loss when the
// agent plays i and the discriminator plays j. The discriminator's loss is
// the negative (zero-sum).
class MatrixGame {
 public:
  MatrixGame(int n_agent, int n_disc, Vec entries);

  static MatrixGame matching_pennies();

  int agent_actions() const { return n_agent_; }
  int disc_actions() const { return n_disc_; }
  double entry(int i, int j) const { return a_[static_cast<size_t>(i) * n_disc_ + j]; }

  // Marginal losses against the opponent's mixed strategy.
  Vec agent_loss_vec(const Vec& mu_d) const;   // (A mu_d)_i
  Vec disc_loss_vec(const Vec& mu_pi) const;   // (-A^T mu_pi)_j

  // Fully mixed equilibrium for matching pennies style games.
  std::pair<Vec, Vec> mne_reference() const;

 private:
  int n_agent_, n_disc_;
  Vec a_;
};

// Convenience evaluations used by tests and by the trajectory logger.
double pennies_loss(const Vec& phi, const Vec& omega, const Vec& code);
std::pair<double, double> relu_pennies_losses(const Vec& phi, const Vec& omega, const Vec& code);
std::pair<double, double> toygan_losses(const ToyGanGame& game, const Vec& gen_params,
                                        const Vec& disc_params, const Vec& code,
                                        const Vec& real_batch, const Vec& noise_batch);

}  // namespace gamelab
