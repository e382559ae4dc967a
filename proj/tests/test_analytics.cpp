#include <cmath>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "gamelab/analytics.hpp"
#include "gamelab/rng.hpp"

using namespace gamelab;

TEST_CASE("step metrics") {
  Vec mne{0, 0, 0, 0};
  auto [s1, d1] = step_metrics({1, 2, 3, 4}, {1, 2, 3, 4}, &mne);
  CHECK(s1 == 0.0);
  auto [s2, d2] = step_metrics({0, 0, 0, 0}, {1, 0, 0, 0}, &mne);
  CHECK(s2 == 1.0);
  CHECK(d2 == 0.0);
  auto [s3, d3] = step_metrics({1, 0, 0, 0}, {0, 0, 0, 0}, nullptr);
  CHECK(s3 == 1.0);
  CHECK(std::isnan(d3));
}

TEST_CASE("cross entropy and kl: uniform case") {
  Vec u{0.5, 0.5};
  auto [h, kl] = cross_entropy_and_kl(u, u, u, u);
  CHECK(h == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
  CHECK(kl == doctest::Approx(0.0));
}

TEST_CASE("kl vanishes when the strategies coincide") {
  Rng rng(5);
  for (int i = 0; i < 20; ++i) {
    double a = rng.uniform(0.05, 0.95), b = rng.uniform(0.05, 0.95);
    Vec pi{a, 1 - a}, d{b, 1 - b};
    auto [h, kl] = cross_entropy_and_kl(pi, d, pi, d);
    CHECK(std::fabs(kl) < 1e-14);
    CHECK(h == doctest::Approx(entropy_pair(pi, d)).epsilon(1e-12));
  }
}

TEST_CASE("cross entropy identity H = H* + KL") {
  Rng rng(6);
  for (int i = 0; i < 100; ++i) {
    double a = rng.uniform(0.02, 0.98), b = rng.uniform(0.02, 0.98);
    double c = rng.uniform(0.02, 0.98), e = rng.uniform(0.02, 0.98);
    Vec star_pi{a, 1 - a}, star_d{b, 1 - b}, mu_pi{c, 1 - c}, mu_d{e, 1 - e};
    auto [h, kl] = cross_entropy_and_kl(star_pi, star_d, mu_pi, mu_d);
    double hstar = entropy_pair(star_pi, star_d);
    CHECK(std::fabs(h - hstar - kl) <= 1e-12);
  }
}

TEST_CASE("cross entropy rejects vanishing support") {
  CHECK_THROWS_AS(cross_entropy_and_kl({0.5, 0.5}, {0.5, 0.5}, {1.0, 0.0}, {0.5, 0.5}),
                  NumericError);
}

TEST_CASE("time average") {
  CHECK(time_average({{1, 2}, {1, 2}, {1, 2}}) == Vec{1, 2});
  Vec v{0.3, -0.9};
  Vec avg = time_average({v, scaled(v, -1.0), v, scaled(v, -1.0)});
  CHECK(std::fabs(avg[0]) < 1e-15);
  CHECK(std::fabs(avg[1]) < 1e-15);
  CHECK_THROWS_AS(time_average({}), PreconditionError);
}

namespace {

struct SynthTraj {
  std::vector<Vec> strategies;
  std::vector<double> dists;
};

SynthTraj make_traj(const std::vector<std::pair<double, double>>& pts) {
  SynthTraj t;
  for (auto [x, y] : pts) {
    t.strategies.push_back({x, y});
    t.dists.push_back(std::hypot(x, y));
  }
  return t;
}

}  // namespace

TEST_CASE("verdicts: settled, cycling, escaping") {
  Vec mne{0, 0};

  SynthTraj settled = make_traj(std::vector<std::pair<double, double>>(200, {0.0, 0.0}));
  CHECK(convergence_verdict(settled.strategies, settled.dists, mne, 0.05, 20) ==
        Verdict::kLastIterate);

  std::vector<std::pair<double, double>> circle;
  for (int i = 0; i < 1000; ++i) {
    double th = 2 * M_PI * i / 100.0;
    circle.push_back({std::cos(th), std::sin(th)});
  }
  SynthTraj cycling = make_traj(circle);
  CHECK(convergence_verdict(cycling.strategies, cycling.dists, mne, 0.05, 100) ==
        Verdict::kWeakOnly);

  std::vector<std::pair<double, double>> spiral;
  for (int i = 0; i < 800; ++i) {
    double r = 0.01 * std::exp(0.02 * i), th = 0.3 * i;
    spiral.push_back({r * std::cos(th), r * std::sin(th)});
  }
  SynthTraj escaping = make_traj(spiral);
  CHECK(convergence_verdict(escaping.strategies, escaping.dists, mne, 0.05, 80) ==
        Verdict::kDiverged);
}

TEST_CASE("shrinking eps never upgrades a verdict to last_iterate") {
  Rng rng(77);
  Vec mne{0, 0};
  for (int trial = 0; trial < 30; ++trial) {
    SynthTraj t;
    double r = rng.uniform(0.0, 0.2);
    for (int i = 0; i < 100; ++i) {
      double th = rng.uniform(0.0, 2 * M_PI);
      t.strategies.push_back({r * std::cos(th), r * std::sin(th)});
      t.dists.push_back(r);
    }
    double big = 0.15, small = 0.03;
    auto vb = convergence_verdict(t.strategies, t.dists, mne, big, 10);
    auto vs = convergence_verdict(t.strategies, t.dists, mne, small, 10);
    if (vs == Verdict::kLastIterate) CHECK(vb == Verdict::kLastIterate);
  }
}

TEST_CASE("verdict window must fit the trajectory") {
  SynthTraj t = make_traj({{0, 0}, {0, 0}});
  CHECK_THROWS_AS(convergence_verdict(t.strategies, t.dists, {0, 0}, 0.05, 3),
                  PreconditionError);
}

TEST_CASE("cycle score: radial approach scores zero") {
  std::vector<std::pair<double, double>> line;
  for (int i = 0; i < 100; ++i) line.push_back({1.0 - i * 0.01, 2.0 - i * 0.02});
  CHECK(cycle_score(line, {0, 0}) == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("cycle score: sampled circle is nearly pure winding") {
  std::vector<std::pair<double, double>> circle;
  for (int rev = 0; rev < 10; ++rev)
    for (int i = 0; i < 100; ++i) {
      double th = 2 * M_PI * i / 100.0;
      circle.push_back({0.4 * std::cos(th), 0.4 * std::sin(th)});
    }
  CHECK(cycle_score(circle, {0, 0}) >= 0.9);
}

TEST_CASE("cycle score: trajectory pinned at the reference scores zero") {
  std::vector<std::pair<double, double>> pts(50, {0.7, -0.1});
  CHECK(cycle_score(pts, {0.7, -0.1}) == 0.0);
}

TEST_CASE("step metrics and time average are permutation covariant") {
  Rng rng(31);
  Vec a = rng.normal_vec(4), b = rng.normal_vec(4), m = rng.normal_vec(4);
  auto perm = [](const Vec& v) { return Vec{v[2], v[0], v[3], v[1]}; };
  Vec pa = perm(a), pb = perm(b), pm = perm(m);
  auto [s1, d1] = step_metrics(a, b, &m);
  auto [s2, d2] = step_metrics(pa, pb, &pm);
  CHECK(s1 == doctest::Approx(s2).epsilon(1e-15));
  CHECK(d1 == doctest::Approx(d2).epsilon(1e-15));
  Vec avg = time_average({a, b});
  Vec pavg = time_average({pa, pb});
  CHECK(perm(avg) == pavg);
}

TEST_CASE("trajectory log enforces ordering and writes the exact schema") {
  TrajectoryLog log;
  TrajectoryRow r0;
  r0.t = 0;
  r0.phi = {0.5, -0.5};
  r0.omega = {0.25, 0.125};
  r0.code = {0.0, 1.0};
  r0.loss_pi = 1.5;
  r0.loss_d = -1.5;
  r0.r_m = -0.25;
  r0.step_norm_sq = 0.0;
  r0.dist_mne = 2.0;
  log.append(r0);
  TrajectoryRow r1 = r0;
  r1.t = 0;
  CHECK_THROWS_AS(log.append(r1), PreconditionError);
  r1.t = 1;
  log.append(r1);

  const std::string path = "traj_test_tmp.csv";
  log.write_csv(path, 2);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "t,phi_0,phi_1,omega_0,omega_1,c_0,c_1,loss_pi,loss_D,r_m,step_norm_sq,dist_mne");
  std::string row;
  std::getline(in, row);
  CHECK(row == "0,0.5,-0.5,0.25,0.125,0,1,1.5,-1.5,-0.25,0,2");
  std::remove(path.c_str());
}

TEST_CASE("nan distances are serialized as nan") {
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(format_double(0.1) == "0.10000000000000001");
}
