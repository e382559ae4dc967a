#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "gamelab/vec.hpp"

namespace gamelab {

// One row per step; `phi`/`omega` hold the full strategy vectors, the CSV
// writer projects them to their first two coordinates.
struct TrajectoryRow {
  long t = 0;
  Vec phi;
  Vec omega;
  Vec code;
  double loss_pi = 0;
  double loss_d = 0;
  double r_m = 0;
  double step_norm_sq = 0;
  double dist_mne = std::numeric_limits<double>::quiet_NaN();
};

class TrajectoryLog {
 public:
  void append(TrajectoryRow row);
  size_t size() const { return rows_.size(); }
  bool empty() const { return rows_.empty(); }
  const TrajectoryRow& operator[](size_t i) const { return rows_[i]; }
  auto begin() const { return rows_.begin(); }
  auto end() const { return rows_.end(); }

  // Schema: t,phi_0,phi_1,omega_0,omega_1,c_0..c_{C-1},loss_pi,loss_D,r_m,
  // step_norm_sq,dist_mne. Written atomically (temp file + rename).
  void write_csv(const std::string& path, int code_size) const;

 private:
  std::vector<TrajectoryRow> rows_;
};

// Squared step norm over the concatenated strategies plus distance to the
// reference point when one exists (NaN otherwise).
std::pair<double, double> step_metrics(const Vec& current, const Vec& previous,
                                       const Vec* mne);

// Cross entropy H(mu*, mu) and KL(mu* || mu) summed over both players'
// simplex strategies. Throws NumericError when mu vanishes where mu* > 0.
std::pair<double, double> cross_entropy_and_kl(const Vec& star_pi, const Vec& star_d,
                                               const Vec& mu_pi, const Vec& mu_d);

// Entropy of a pair of simplex strategies (H(mu*, mu*) shortcut).
double entropy_pair(const Vec& pi, const Vec& d);

// Arithmetic mean of strategy vectors.
Vec time_average(const std::vector<Vec>& history);

enum class Verdict { kLastIterate, kWeakOnly, kDiverged };

std::string to_string(Verdict v);

// last_iterate: distance below eps over the whole final window;
// weak_only:    the time-averaged strategy lands within eps of the reference;
// diverged:     neither.
Verdict convergence_verdict(const std::vector<Vec>& strategies,
                            const std::vector<double>& dists, const Vec& mne,
                            double eps, int window);

// Fraction of consistent winding around `center` in a 2-D projection:
// |total signed angle| / total absolute angle. 0 for radial approach or a
// trajectory sitting at the center, near 1 for pure rotation.
double cycle_score(const std::vector<std::pair<double, double>>& points,
                   std::pair<double, double> center);

// Format a double exactly as the CSV writer does.
std::string format_double(double x);

// Write a whole file atomically (temp + rename).
void atomic_write_file(const std::string& path, const std::string& contents);

}  // namespace gamelab
