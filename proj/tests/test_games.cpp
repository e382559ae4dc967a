#include <cmath>

#include "doctest.h"
#include "gamelab/games.hpp"

using namespace gamelab;

TEST_CASE("pennies loss values") {
  CHECK(pennies_loss({0, 0}, {0.7, -0.3}, {}) == 0.0);
  CHECK(pennies_loss({1, 0}, {1, 0}, {}) == 1.0);
  CHECK(pennies_loss({1, 0}, {0, 1}, {}) == -1.0);
}

TEST_CASE("relu pennies discriminator loss") {
  // phi^T A omega = 1 at ((1,0),(1,0)); = -1 at ((1,0),(0,1)).
  auto [lp1, ld1] = relu_pennies_losses({1, 0}, {1, 0}, {});
  CHECK(lp1 == 1.0);
  CHECK(ld1 == 0.0);
  auto [lp2, ld2] = relu_pennies_losses({1, 0}, {0, 1}, {});
  CHECK(lp2 == -1.0);
  CHECK(ld2 == 1.0);
  auto [lp3, ld3] = relu_pennies_losses({0, 0}, {0.4, 0.1}, {});
  CHECK(lp3 == 0.0);
  CHECK(ld3 == 0.0);
}

TEST_CASE("zero-sum games cancel at random points") {
  PenniesGame pennies;
  Rng rng(101);
  for (int i = 0; i < 100; ++i) {
    Vec phi = rng.normal_vec(2), omega = rng.normal_vec(2), code = rng.normal_vec(2);
    double lp = pennies.loss_pi_value(phi, omega, code, {});
    double ld = pennies.loss_d_value(phi, omega, code, {});
    CHECK(std::fabs(lp + ld) <= 1e-12);
  }
}

TEST_CASE("toygan is zero-sum at random points") {
  ToyGanGame game({.data_mean = 2.0, .data_std = 0.5, .batch = 8, .code_size = 2});
  Rng rng(55);
  Rng init(56);
  for (int i = 0; i < 20; ++i) {
    Vec gen = mlp_init(game.gen_spec(), init).values;
    Vec disc = mlp_init(game.disc_spec(), init).values;
    GameRound round = game.sample_round(rng);
    Vec code = rng.normal_vec(2);
    double lp = game.loss_pi_value(gen, disc, code, round);
    double ld = game.loss_d_value(gen, disc, code, round);
    CHECK(std::fabs(lp + ld) <= 1e-12);
  }
}

TEST_CASE("zero code reduces to the unperturbed game exactly") {
  PenniesGame pennies;
  ReluPenniesGame relu_pennies;
  Rng rng(7);
  for (int i = 0; i < 100; ++i) {
    Vec phi = rng.normal_vec(2), omega = rng.normal_vec(2);
    Vec zero2{0, 0}, zero1{0};
    CHECK(pennies.loss_pi_value(phi, omega, zero2, {}) ==
          pennies.loss_pi_value(phi, omega, {}, {}));
    CHECK(pennies.loss_pi_value(phi, omega, zero1, {}) ==
          pennies.loss_pi_value(phi, omega, {}, {}));
    CHECK(relu_pennies.loss_d_value(phi, omega, zero2, {}) ==
          relu_pennies.loss_d_value(phi, omega, {}, {}));
  }
}

TEST_CASE("nonzero codes do perturb the pennies losses") {
  PenniesGame pennies;
  CHECK(pennies.loss_pi_value({0.3, 0.1}, {0.2, -0.4}, {0.5, -0.2}, {}) !=
        pennies.loss_pi_value({0.3, 0.1}, {0.2, -0.4}, {}, {}));
}

TEST_CASE("bilinear saddle: equilibrium strategies flatten the loss") {
  PenniesGame pennies;
  Rng rng(13);
  for (int i = 0; i < 100; ++i) {
    Vec other = rng.normal_vec(2);
    CHECK(pennies.loss_pi_value({0, 0}, other, {}, {}) == 0.0);
    CHECK(pennies.loss_pi_value(other, {0, 0}, {}, {}) == 0.0);
  }
}

TEST_CASE("relu pennies discriminator loss is nonnegative everywhere") {
  ReluPenniesGame g;
  Rng rng(29);
  for (int i = 0; i < 200; ++i) {
    Vec phi = rng.normal_vec(2), omega = rng.normal_vec(2), code = rng.normal_vec(1);
    CHECK(g.loss_d_value(phi, omega, code, {}) >= 0.0);
  }
}

TEST_CASE("pennies plain and tape evaluations agree exactly") {
  PenniesGame g;
  Rng rng(67);
  for (int i = 0; i < 50; ++i) {
    Vec phi = rng.normal_vec(2), omega = rng.normal_vec(2), code = rng.normal_vec(2);
    double plain = g.loss_pi_value(phi, omega, code, {});
    double taped = g.ParamGame::loss_pi_value(phi, omega, code, {});
    CHECK(plain == doctest::Approx(taped).epsilon(1e-15));
  }
}

TEST_CASE("toygan: flat discriminator scores give 2 ln(1/2)") {
  ToyGanGame game({.data_mean = 2.0, .data_std = 0.5, .batch = 16, .code_size = 2});
  Rng rng(3);
  Vec gen = mlp_init(game.gen_spec(), rng).values;
  Vec disc(static_cast<size_t>(mlp_param_count(game.disc_spec())), 0.0);  // logit 0
  GameRound round = game.sample_round(rng);
  auto [lp, ld] = toygan_losses(game, gen, disc, {0, 0}, round.real, round.noise);
  const double expected = 2.0 * std::log(0.5);
  CHECK(lp == doctest::Approx(expected).epsilon(1e-12));
  CHECK(ld == doctest::Approx(-expected).epsilon(1e-12));
}

TEST_CASE("toygan: perfect generator makes the value symmetric in real/fake") {
  ToyGanGame game({.data_mean = 2.0, .data_std = 0.5, .batch = 12, .code_size = 1});
  Rng rng(19);
  // Generator echoes its noise input: w_z = 1, code weight 0, bias 0.
  Vec gen(static_cast<size_t>(mlp_param_count(game.gen_spec())), 0.0);
  gen[0] = 1.0;
  Vec disc = mlp_init(game.disc_spec(), rng).values;
  GameRound round = game.sample_round(rng);
  round.noise = round.real;  // fake batch == real batch
  auto [l1, _] = toygan_losses(game, gen, disc, {0.3}, round.real, round.noise);
  GameRound swapped{round.noise, round.real};
  auto [l2, __] = toygan_losses(game, gen, disc, {0.3}, swapped.real, swapped.noise);
  CHECK(l1 == doctest::Approx(l2).epsilon(1e-14));
}

TEST_CASE("toygan rejects empty batches") {
  ToyGanGame game({.batch = 4, .code_size = 1});
  Rng rng(1);
  Vec gen = mlp_init(game.gen_spec(), rng).values;
  Vec disc = mlp_init(game.disc_spec(), rng).values;
  CHECK_THROWS_AS(game.loss_pi_value(gen, disc, {0.0}, GameRound{}), ConfigError);
}

TEST_CASE("toygan generator gradient matches finite differences") {
  ToyGanGame game({.data_mean = 1.0, .data_std = 0.3, .batch = 6, .code_size = 2});
  Rng rng(23);
  Vec disc = mlp_init(game.disc_spec(), rng).values;
  GameRound round = game.sample_round(rng);
  Vec code = rng.normal_vec(2);
  auto f = [&](Tape& t, Var g) {
    return game.loss_pi(t, g, t.leaf(disc), t.leaf(code), round);
  };
  for (int trial = 0; trial < 5; ++trial) {
    Vec gen = mlp_init(game.gen_spec(), rng).values;
    CHECK(max_rel_err(grad(f, gen), finite_diff(f, gen, 1e-5)) < 1e-5);
  }
}

TEST_CASE("equilibrium references") {
  CHECK(PenniesGame{}.mne_reference().value() == std::make_pair(Vec{0, 0}, Vec{0, 0}));
  CHECK(ReluPenniesGame{}.mne_reference().value() == std::make_pair(Vec{0, 0}, Vec{0, 0}));
  auto [mp, md] = MatrixGame::matching_pennies().mne_reference();
  CHECK(mp == Vec{0.5, 0.5});
  CHECK(md == Vec{0.5, 0.5});
  CHECK(!ToyGanGame({.batch = 4}).mne_reference().has_value());
}

TEST_CASE("matrix game marginal losses") {
  MatrixGame g = MatrixGame::matching_pennies();
  // Against a (0.25, 0.75) discriminator: u_pi = A mu_d.
  Vec u_pi = g.agent_loss_vec({0.25, 0.75});
  CHECK(u_pi[0] == doctest::Approx(0.25 - 0.75));
  CHECK(u_pi[1] == doctest::Approx(-0.25 + 0.75));
  Vec u_d = g.disc_loss_vec({0.9, 0.1});
  CHECK(u_d[0] == doctest::Approx(-(0.9 - 0.1)));
  CHECK(u_d[1] == doctest::Approx(-(-0.9 + 0.1)));
}
