#include <cmath>

#include "doctest.h"
#include "gamelab/mlp.hpp"
#include "gamelab/rng.hpp"
#include "gamelab/tape.hpp"

using namespace gamelab;

TEST_CASE("rng is reproducible from the seed") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng c(43);
  CHECK(Rng(42).next_u64() != c.next_u64());
}

TEST_CASE("derived streams are independent of draw position") {
  Rng a(7);
  a.normal_vec(10);
  Rng child_late = a.derive(3);
  Rng child_fresh = Rng(7).derive(3);
  CHECK(child_late.next_u64() == child_fresh.next_u64());
  CHECK(Rng(7).derive(1).next_u64() != Rng(7).derive(2).next_u64());
}

TEST_CASE("exponential inverse cdf") {
  CHECK(exponential_inverse_cdf(0.0, 2.0) == 0.0);
  CHECK_THROWS_AS(exponential_inverse_cdf(0.5, 0.0), ConfigError);
  CHECK_THROWS_AS(exponential_inverse_cdf(0.5, -1.0), ConfigError);

  // Monte-Carlo mean over 1e6 samples within 1% of 1/rate.
  Rng rng(123);
  const double zeta = 2.5;
  double sum = 0;
  const int n = 1'000'000;
  for (int i = 0; i < n; ++i) sum += sample_exponential(zeta, rng);
  CHECK(std::fabs(sum / n - 1.0 / zeta) < 0.01 / zeta);

  Rng r1(9), r2(9);
  CHECK(sample_exponential(1.0, r1) == sample_exponential(1.0, r2));
}

TEST_CASE("grad of x.x is 2x") {
  auto f = [](Tape& t, Var x) { return dot(x, x); };
  Vec g = grad(f, {3.0});
  CHECK(g[0] == doctest::Approx(6.0).epsilon(1e-12));
  Vec g2 = grad(f, {1.0, -2.0, 0.5});
  CHECK(g2[0] == doctest::Approx(2.0));
  CHECK(g2[1] == doctest::Approx(-4.0));
  CHECK(g2[2] == doctest::Approx(1.0));
}

TEST_CASE("grad of a constant is zero") {
  auto f = [](Tape& t, Var x) { return t.leaf(5.0); };
  for (double gi : grad(f, {1.0, 2.0})) CHECK(gi == 0.0);
}

TEST_CASE("finite_diff on a quadratic is exact up to rounding") {
  auto f = [](Tape& t, Var x) { return dot(x, x); };
  Vec g = finite_diff(f, {1.0}, 1e-5);
  CHECK(std::fabs(g[0] - 2.0) < 1e-8);
  auto c = [](Tape& t, Var) { return t.leaf(3.0); };
  CHECK(finite_diff(c, {1.0}, 1e-5)[0] == 0.0);
  CHECK_THROWS_AS(finite_diff(f, {1.0}, 0.0), PreconditionError);
}

TEST_CASE("tape primitives match finite differences") {
  Rng rng(2024);
  auto f = [](Tape& t, Var x) {
    Var a = slice_rows(x, 0, 2);
    Var b = slice_rows(x, 2, 2);
    Var h = tanh(a) + relu(b) * exp(-0.5 * a);
    Var s = sigmoid(dot(h, b)) + log_sigmoid(sum(a));
    return s + mean(square(h)) + log(exp(dot(a, a)) + t.leaf(1.0));
  };
  for (int trial = 0; trial < 20; ++trial) {
    Vec x = rng.normal_vec(4);
    CHECK(max_rel_err(grad(f, x), finite_diff(f, x, 1e-5)) < 1e-5);
  }
}

TEST_CASE("non-finite intermediates raise NumericError naming the op") {
  Tape t;
  Var x = t.leaf(Vec{-1.0});
  CHECK_THROWS_WITH_AS(t.vlog(x), doctest::Contains("log"), NumericError);
  Var big = t.leaf(Vec{1e308});
  CHECK_THROWS_AS(t.add(big, big), NumericError);
}

TEST_CASE("matmul and batched helpers differentiate correctly") {
  Rng rng(5);
  // x = [W(2x3) ; b(2) ; input(3)]
  auto f = [](Tape& t, Var x) {
    Var w = reshape(slice_rows(x, 0, 6), 2, 3);
    Var b = slice_rows(x, 6, 2);
    Var in = slice_rows(x, 8, 3);
    Var m = add_colvec(matmul(w, tile_cols(in, 4)), b);  // 2x4
    return mean(square(tanh(m)));
  };
  for (int trial = 0; trial < 10; ++trial) {
    Vec x = rng.normal_vec(11);
    CHECK(max_rel_err(grad(f, x), finite_diff(f, x, 1e-5)) < 1e-5);
  }
}

TEST_CASE("mlp forward: zero parameters give zero output") {
  MlpSpec spec{{3, 4, 2}, Act::kTanh};
  Vec params(static_cast<size_t>(mlp_param_count(spec)), 0.0);
  Vec out = mlp_forward(spec, params, {1.0, -2.0, 0.5});
  for (double y : out) CHECK(y == 0.0);
}

TEST_CASE("mlp forward: identity affine layer echoes its input") {
  MlpSpec spec{{2, 2}, Act::kTanh};
  Vec params(static_cast<size_t>(mlp_param_count(spec)), 0.0);
  params[0] = 1.0;  // W = I
  params[3] = 1.0;
  Vec out = mlp_forward(spec, params, {0.3, -0.7});
  CHECK(out[0] == doctest::Approx(0.3));
  CHECK(out[1] == doctest::Approx(-0.7));
}

TEST_CASE("mlp gradient w.r.t. all weights matches finite differences") {
  MlpSpec spec{{3, 8, 1}, Act::kTanh};
  Rng rng(11);
  Vec input = rng.normal_vec(3);
  auto f = [&](Tape& t, Var p) {
    return sum(mlp_forward(t, p, spec, t.leaf(input)));
  };
  for (int trial = 0; trial < 5; ++trial) {
    Vec params = mlp_init(spec, rng).values;
    CHECK(max_rel_err(grad(f, params), finite_diff(f, params, 1e-5)) < 1e-5);
  }
}

TEST_CASE("tape and plain mlp forwards agree") {
  MlpSpec spec{{4, 16, 16, 3}, Act::kTanh};
  Rng rng(17);
  Vec params = mlp_init(spec, rng).values;
  Vec input = rng.normal_vec(4);
  Tape t;
  Vec tape_out = t.value(mlp_forward(t, t.leaf(params), spec, t.leaf(input)));
  Vec plain_out = mlp_forward(spec, params, input);
  for (size_t i = 0; i < plain_out.size(); ++i)
    CHECK(tape_out[i] == doctest::Approx(plain_out[i]).epsilon(1e-14));
}

TEST_CASE("gaussian head: zero noise returns the mean") {
  GaussianHead h{{0.4, -1.2}, {-0.5, 0.3}};
  auto [c, lp] = gaussian_reparam_apply(h, {0.0, 0.0});
  CHECK(c[0] == h.mean[0]);
  CHECK(c[1] == h.mean[1]);
  CHECK(lp == doctest::Approx(gaussian_log_prob(h, h.mean)));
}

TEST_CASE("gaussian log density at the mean of a standard head") {
  // -0.5 * ln(2 pi) per dimension.
  const double per_dim = -0.5 * std::log(2.0 * 3.14159265358979323846);
  for (int c = 1; c <= 3; ++c) {
    GaussianHead h{Vec(c, 0.0), Vec(c, 0.0)};
    CHECK(gaussian_log_prob(h, Vec(c, 0.0)) == doctest::Approx(per_dim * c).epsilon(1e-12));
  }
}

TEST_CASE("gaussian sampling is reproducible from the seed") {
  GaussianHead h{{0.1, 0.2}, {-1.0, -1.0}};
  Rng a(77), b(77);
  auto [c1, lp1] = gaussian_reparam_sample(h, a);
  auto [c2, lp2] = gaussian_reparam_sample(h, b);
  CHECK(c1 == c2);
  CHECK(lp1 == lp2);
}

TEST_CASE("tape-side gaussian log prob matches the plain formula") {
  Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    Vec mean = rng.normal_vec(3), log_std = rng.normal_vec(3), c = rng.normal_vec(3);
    Tape t;
    Var lp = gaussian_log_prob(t, t.leaf(mean), t.leaf(log_std), c);
    GaussianHead h{mean, log_std};
    CHECK(t.value_scalar(lp) == doctest::Approx(gaussian_log_prob(h, c)).epsilon(1e-12));
  }
}

TEST_CASE("log_std clamp keeps heads in range") {
  Vec raw{0.0, 0.0, -20.0, 20.0};
  GaussianHead h = split_gaussian_head(raw);
  CHECK(h.log_std[0] == kLogStdMin);
  CHECK(h.log_std[1] == kLogStdMax);
}
