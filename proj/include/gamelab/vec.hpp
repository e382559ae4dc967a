#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "gamelab/errors.hpp"

namespace gamelab {

using Vec = std::vector<double>;

inline bool all_finite(const Vec& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

inline void require_finite(const Vec& v, const std::string& where) {
  if (!all_finite(v)) throw NumericError("non-finite value in " + where);
}

inline double dot(const Vec& a, const Vec& b) {
  double s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2_sq(const Vec& a) { return dot(a, a); }

inline double norm2(const Vec& a) { return std::sqrt(norm2_sq(a)); }

inline Vec add(const Vec& a, const Vec& b) {
  Vec r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

inline Vec sub(const Vec& a, const Vec& b) {
  Vec r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

inline Vec scaled(const Vec& a, double k) {
  Vec r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = k * a[i];
  return r;
}

// y += k * x
inline void axpy(double k, const Vec& x, Vec& y) {
  for (size_t i = 0; i < x.size(); ++i) y[i] += k * x[i];
}

inline Vec concat(const Vec& a, const Vec& b) {
  Vec r = a;
  r.insert(r.end(), b.begin(), b.end());
  return r;
}

inline double mean_of(const Vec& a) {
  if (a.empty()) return 0;
  double s = 0;
  for (double x : a) s += x;
  return s / static_cast<double>(a.size());
}

inline double stddev_of(const Vec& a) {
  if (a.size() < 2) return 0;
  double m = mean_of(a);
  double s = 0;
  for (double x : a) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(a.size()));
}

}  // namespace gamelab
