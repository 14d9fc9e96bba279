#pragma once

#include "overlapmesh/geometry.hpp"
#include "overlapmesh/mesh.hpp"

#include <cmath>
#include <random>

namespace olm::testing {

inline Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Eigen::Quaterniond q(g(rng), g(rng), g(rng), g(rng));
  q.normalize();
  return q.toRotationMatrix();
}

inline Vec3 random_point(std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  return {u(rng), u(rng), u(rng)};
}

// Well shaped random tetrahedron inside [lo, hi]^3.
inline TetPoints random_tet(std::mt19937_64& rng, double lo = 0.0, double hi = 1.0) {
  for (;;) {
    TetPoints t{random_point(rng, lo, hi), random_point(rng, lo, hi), random_point(rng, lo, hi),
                random_point(rng, lo, hi)};
    double l = 0.0;
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j) l = std::max(l, (t[i] - t[j]).norm());
    if (tet_volume(t) > 0.01 * l * l * l) return t;
  }
}

inline bool inside_all(const std::array<Plane, 4>& planes, const Vec3& x) {
  for (const Plane& h : planes)
    if (h.signed_distance(x) > 0.0) return false;
  return true;
}

// Mean and standard error of f over uniform samples of the box.
struct McEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
};

template <class F>
McEstimate monte_carlo(std::mt19937_64& rng, const Aabb& box, long samples, F&& f) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Vec3 ext = box.max - box.min;
  const double vol = ext.prod();
  double s = 0.0, s2 = 0.0;
  for (long i = 0; i < samples; ++i) {
    const Vec3 x = box.min + Vec3(u(rng), u(rng), u(rng)).cwiseProduct(ext);
    const double v = f(x);
    s += v;
    s2 += v * v;
  }
  const double n = static_cast<double>(samples);
  const double mean = s / n;
  const double var = std::max(0.0, s2 / n - mean * mean);
  return {vol * mean, vol * std::sqrt(var / n)};
}

}  // namespace olm::testing
