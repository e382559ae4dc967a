#include "gamelab/games.hpp"

#include <cmath>

namespace gamelab {

namespace {

// Pennies payoff matrix, row-major.
constexpr double kA[4] = {1, -1, -1, 1};

double pennies_bilinear(const Vec& phi, const Vec& omega, const Vec& code) {
  auto [c_pi, c_d] = split_code(code);
  const double p0 = phi[0] + c_pi, p1 = phi[1];
  const double o0 = omega[0] + c_d, o1 = omega[1];
  return p0 * (kA[0] * o0 + kA[1] * o1) + p1 * (kA[2] * o0 + kA[3] * o1);
}

// Shared tape-side builder for the perturbed bilinear form.
Var pennies_bilinear(Tape& tape, Var phi, Var omega, Var code) {
  Var phi_t = phi, omega_t = omega;
  if (code.valid()) {
    Var e1 = tape.leaf(Vec{1, 0});
    int c = code.tape->size(code);
    if (c < 1 || c > 2) throw ConfigError("pennies: code length must be 0, 1 or 2");
    Var c_pi = slice_rows(code, 0, 1);
    Var c_d = c == 2 ? slice_rows(code, 1, 1) : c_pi;
    phi_t = phi + matmul(e1, c_pi);
    omega_t = omega + matmul(e1, c_d);
  }
  Var a = tape.leaf(Vec{kA[0], kA[1], kA[2], kA[3]}, 2, 2);
  return dot(phi_t, matmul(a, omega_t));
}

}  // namespace

std::pair<double, double> split_code(const Vec& code) {
  switch (code.size()) {
    case 0: return {0.0, 0.0};
    case 1: return {code[0], code[0]};
    case 2: return {code[0], code[1]};
    default: throw ConfigError("code length must be 0, 1 or 2 for parameter games");
  }
}

double ParamGame::loss_pi_value(const Vec& phi, const Vec& omega, const Vec& code,
                                const GameRound& round) const {
  Tape tape;
  Var p = tape.leaf(phi), o = tape.leaf(omega);
  Var c = code.empty() ? Var{} : tape.leaf(code);
  return tape.value_scalar(loss_pi(tape, p, o, c, round));
}

double ParamGame::loss_d_value(const Vec& phi, const Vec& omega, const Vec& code,
                               const GameRound& round) const {
  Tape tape;
  Var p = tape.leaf(phi), o = tape.leaf(omega);
  Var c = code.empty() ? Var{} : tape.leaf(code);
  return tape.value_scalar(loss_d(tape, p, o, c, round));
}

Var PenniesGame::loss_pi(Tape& tape, Var phi, Var omega, Var code, const GameRound&) const {
  return pennies_bilinear(tape, phi, omega, code);
}

Var PenniesGame::loss_d(Tape& tape, Var phi, Var omega, Var code, const GameRound&) const {
  return -pennies_bilinear(tape, phi, omega, code);
}

double PenniesGame::loss_pi_value(const Vec& phi, const Vec& omega, const Vec& code,
                                  const GameRound&) const {
  return pennies_bilinear(phi, omega, code);
}

double PenniesGame::loss_d_value(const Vec& phi, const Vec& omega, const Vec& code,
                                 const GameRound&) const {
  return -pennies_bilinear(phi, omega, code);
}

Var ReluPenniesGame::loss_pi(Tape& tape, Var phi, Var omega, Var code, const GameRound&) const {
  return pennies_bilinear(tape, phi, omega, code);
}

Var ReluPenniesGame::loss_d(Tape& tape, Var phi, Var omega, Var code, const GameRound&) const {
  return relu(-pennies_bilinear(tape, phi, omega, code));
}

double ReluPenniesGame::loss_pi_value(const Vec& phi, const Vec& omega, const Vec& code,
                                      const GameRound&) const {
  return pennies_bilinear(phi, omega, code);
}

double ReluPenniesGame::loss_d_value(const Vec& phi, const Vec& omega, const Vec& code,
                                     const GameRound&) const {
  return std::max(0.0, -pennies_bilinear(phi, omega, code));
}

ToyGanGame::ToyGanGame(const ToyGanConfig& cfg) : cfg_(cfg) {
  if (cfg.batch < 1) throw ConfigError("toygan: batch must be >= 1");
  if (cfg.code_size < 0) throw ConfigError("toygan: code size must be >= 0");
  gen_spec_ = MlpSpec{{1 + cfg.code_size, 1}, Act::kTanh};
  disc_spec_ = MlpSpec{{1 + cfg.code_size, cfg.disc_hidden, cfg.disc_hidden, 1}, Act::kTanh};
}

GameRound ToyGanGame::sample_round(Rng& rng) const {
  GameRound r;
  r.real.resize(static_cast<size_t>(cfg_.batch));
  r.noise.resize(static_cast<size_t>(cfg_.batch));
  for (auto& x : r.real) x = cfg_.data_mean + cfg_.data_std * rng.normal();
  for (auto& z : r.noise) z = rng.normal();
  return r;
}

Var ToyGanGame::game_value(Tape& tape, Var phi, Var omega, Var code,
                           const GameRound& round) const {
  if (round.real.empty() || round.noise.empty())
    throw ConfigError("toygan: empty batch");
  int m = static_cast<int>(round.real.size());

  auto with_code = [&](Var row) {
    if (cfg_.code_size == 0) return row;
    if (!code.valid()) throw ConfigError("toygan: code of configured size required");
    if (code.tape->size(code) != cfg_.code_size)
      throw ConfigError("toygan: code length mismatch");
    return concat_rows(row, tile_cols(code, m));
  };

  Var real_row = tape.leaf(round.real, 1, m);
  Var noise_row = tape.leaf(round.noise, 1, m);

  Var d_real = mlp_forward(tape, omega, disc_spec_, with_code(real_row));
  Var fake = mlp_forward(tape, phi, gen_spec_, with_code(noise_row));
  Var d_fake = mlp_forward(tape, omega, disc_spec_, with_code(fake));

  return mean(log_sigmoid(d_real)) + mean(log_sigmoid(-d_fake));
}

Var ToyGanGame::loss_pi(Tape& tape, Var phi, Var omega, Var code, const GameRound& round) const {
  return game_value(tape, phi, omega, code, round);
}

Var ToyGanGame::loss_d(Tape& tape, Var phi, Var omega, Var code, const GameRound& round) const {
  return -game_value(tape, phi, omega, code, round);
}

Vec ToyGanGame::generate(const Vec& gen_params, const Vec& code, const Vec& noise) const {
  if (static_cast<int>(code.size()) != cfg_.code_size)
    throw ConfigError("toygan generate: code length mismatch");
  Vec out(noise.size());
  Vec in(static_cast<size_t>(1 + cfg_.code_size));
  for (size_t i = 0; i < noise.size(); ++i) {
    in[0] = noise[i];
    for (int j = 0; j < cfg_.code_size; ++j) in[1 + j] = code[j];
    out[i] = mlp_forward(gen_spec_, gen_params, in)[0];
  }
  return out;
}

MatrixGame::MatrixGame(int n_agent, int n_disc, Vec entries)
    : n_agent_(n_agent), n_disc_(n_disc), a_(std::move(entries)) {
  if (n_agent_ < 2 || n_disc_ < 2) throw ConfigError("matrix game: need >= 2 actions per player");
  if (a_.size() != static_cast<size_t>(n_agent_) * n_disc_)
    throw ConfigError("matrix game: entry count mismatch");
}

MatrixGame MatrixGame::matching_pennies() { return MatrixGame(2, 2, {1, -1, -1, 1}); }

Vec MatrixGame::agent_loss_vec(const Vec& mu_d) const {
  if (mu_d.size() != static_cast<size_t>(n_disc_))
    throw PreconditionError("agent_loss_vec: strategy length mismatch");
  Vec u(static_cast<size_t>(n_agent_), 0.0);
  for (int i = 0; i < n_agent_; ++i)
    for (int j = 0; j < n_disc_; ++j) u[i] += entry(i, j) * mu_d[j];
  return u;
}

Vec MatrixGame::disc_loss_vec(const Vec& mu_pi) const {
  if (mu_pi.size() != static_cast<size_t>(n_agent_))
    throw PreconditionError("disc_loss_vec: strategy length mismatch");
  Vec u(static_cast<size_t>(n_disc_), 0.0);
  for (int j = 0; j < n_disc_; ++j)
    for (int i = 0; i < n_agent_; ++i) u[j] -= entry(i, j) * mu_pi[i];
  return u;
}

std::pair<Vec, Vec> MatrixGame::mne_reference() const {
  Vec pi(static_cast<size_t>(n_agent_), 1.0 / n_agent_);
  Vec d(static_cast<size_t>(n_disc_), 1.0 / n_disc_);
  return {pi, d};
}

double pennies_loss(const Vec& phi, const Vec& omega, const Vec& code) {
  return PenniesGame{}.loss_pi_value(phi, omega, code, {});
}

std::pair<double, double> relu_pennies_losses(const Vec& phi, const Vec& omega, const Vec& code) {
  ReluPenniesGame g;
  return {g.loss_pi_value(phi, omega, code, {}), g.loss_d_value(phi, omega, code, {})};
}

std::pair<double, double> toygan_losses(const ToyGanGame& game, const Vec& gen_params,
                                        const Vec& disc_params, const Vec& code,
                                        const Vec& real_batch, const Vec& noise_batch) {
  GameRound round{real_batch, noise_batch};
  double l = game.loss_pi_value(gen_params, disc_params, code, round);
  return {l, -l};
}

}  // namespace gamelab
