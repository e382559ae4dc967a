#include "gamelab/analytics.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "gamelab/errors.hpp"

namespace gamelab {

void TrajectoryLog::append(TrajectoryRow row) {
  if (!rows_.empty() && row.t <= rows_.back().t)
    throw PreconditionError("TrajectoryLog: rows must be strictly ordered by t");
  rows_.push_back(std::move(row));
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

void atomic_write_file(const std::string& path, const std::string& contents) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + tmp + "' for writing");
    out << contents;
    if (!out.good()) throw IoError("write failed for '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw IoError("rename to '" + path + "' failed");
}

void TrajectoryLog::write_csv(const std::string& path, int code_size) const {
  std::string out = "t,phi_0,phi_1,omega_0,omega_1";
  for (int c = 0; c < code_size; ++c) out += ",c_" + std::to_string(c);
  out += ",loss_pi,loss_D,r_m,step_norm_sq,dist_mne\n";
  for (const auto& r : rows_) {
    out += std::to_string(r.t);
    auto proj = [&](const Vec& v, int i) { return i < static_cast<int>(v.size()) ? v[i] : 0.0; };
    for (int i = 0; i < 2; ++i) out += "," + format_double(proj(r.phi, i));
    for (int i = 0; i < 2; ++i) out += "," + format_double(proj(r.omega, i));
    for (int c = 0; c < code_size; ++c) out += "," + format_double(proj(r.code, c));
    out += "," + format_double(r.loss_pi);
    out += "," + format_double(r.loss_d);
    out += "," + format_double(r.r_m);
    out += "," + format_double(r.step_norm_sq);
    out += "," + format_double(r.dist_mne);
    out += "\n";
  }
  atomic_write_file(path, out);
}

std::pair<double, double> step_metrics(const Vec& current, const Vec& previous,
                                       const Vec* mne) {
  if (current.size() != previous.size())
    throw PreconditionError("step_metrics: dimension mismatch");
  double step_sq = 0;
  for (size_t i = 0; i < current.size(); ++i) {
    double d = current[i] - previous[i];
    step_sq += d * d;
  }
  double dist = std::numeric_limits<double>::quiet_NaN();
  if (mne != nullptr) {
    if (mne->size() != current.size())
      throw PreconditionError("step_metrics: reference dimension mismatch");
    dist = norm2(sub(current, *mne));
  }
  return {step_sq, dist};
}

namespace {

std::pair<double, double> ce_kl_one(const Vec& star, const Vec& mu) {
  if (star.size() != mu.size()) throw PreconditionError("cross_entropy: dimension mismatch");
  double h = 0, kl = 0;
  for (size_t i = 0; i < star.size(); ++i) {
    if (star[i] <= 0) continue;
    if (mu[i] <= 0) throw NumericError("cross_entropy: zero probability under the reference support");
    h -= star[i] * std::log(mu[i]);
    kl += star[i] * std::log(star[i] / mu[i]);
  }
  return {h, kl};
}

}  // namespace

std::pair<double, double> cross_entropy_and_kl(const Vec& star_pi, const Vec& star_d,
                                               const Vec& mu_pi, const Vec& mu_d) {
  auto [h1, k1] = ce_kl_one(star_pi, mu_pi);
  auto [h2, k2] = ce_kl_one(star_d, mu_d);
  return {h1 + h2, k1 + k2};
}

double entropy_pair(const Vec& pi, const Vec& d) {
  return cross_entropy_and_kl(pi, d, pi, d).first;
}

Vec time_average(const std::vector<Vec>& history) {
  if (history.empty()) throw PreconditionError("time_average: empty history");
  Vec avg(history.front().size(), 0.0);
  for (const Vec& v : history) {
    if (v.size() != avg.size()) throw PreconditionError("time_average: ragged history");
    axpy(1.0, v, avg);
  }
  return scaled(avg, 1.0 / static_cast<double>(history.size()));
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::kLastIterate: return "last_iterate";
    case Verdict::kWeakOnly: return "weak_only";
    case Verdict::kDiverged: return "diverged";
  }
  return "?";
}

Verdict convergence_verdict(const std::vector<Vec>& strategies,
                            const std::vector<double>& dists, const Vec& mne,
                            double eps, int window) {
  if (strategies.empty() || strategies.size() != dists.size())
    throw PreconditionError("convergence_verdict: inconsistent trajectory");
  if (window < 1 || window > static_cast<int>(dists.size()))
    throw PreconditionError("convergence_verdict: window exceeds trajectory length");

  bool last_ok = true;
  for (size_t i = dists.size() - static_cast<size_t>(window); i < dists.size(); ++i)
    if (!(dists[i] < eps)) { last_ok = false; break; }
  if (last_ok) return Verdict::kLastIterate;

  Vec avg = time_average(strategies);
  if (norm2(sub(avg, mne)) < eps) return Verdict::kWeakOnly;
  return Verdict::kDiverged;
}

double cycle_score(const std::vector<std::pair<double, double>>& points,
                   std::pair<double, double> center) {
  double signed_total = 0, abs_total = 0;
  bool have_prev = false;
  double prev_x = 0, prev_y = 0;
  for (const auto& [px, py] : points) {
    double x = px - center.first, y = py - center.second;
    if (std::hypot(x, y) < 1e-12) { have_prev = false; continue; }
    if (have_prev) {
      double cross = prev_x * y - prev_y * x;
      double d = prev_x * x + prev_y * y;
      double dtheta = std::atan2(cross, d);
      signed_total += dtheta;
      abs_total += std::fabs(dtheta);
    }
    prev_x = x;
    prev_y = y;
    have_prev = true;
  }
  if (abs_total < 1e-12) return 0.0;
  return std::fabs(signed_total) / abs_total;
}

}  // namespace gamelab
