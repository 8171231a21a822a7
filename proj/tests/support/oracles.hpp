#pragma once

// Reference computations for the tests. Each one takes a different route from
// the library code it checks: explicit pair enumeration, bisection on eps,
// Carathéodory subset enumeration for hulls, exhaustive best responses.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

namespace oracle {

using Vec = Eigen::VectorXd;

inline double point_to_set(const Vec& x, const std::vector<Vec>& b) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& y : b) best = std::min(best, (x - y).norm());
  return best;
}

/// max(sup_a dist(a,B), sup_b dist(b,A)) by explicit enumeration.
inline double hausdorff_sup(const std::vector<Vec>& a, const std::vector<Vec>& b) {
  double h = 0.0;
  for (const auto& x : a) h = std::max(h, point_to_set(x, b));
  for (const auto& y : b) h = std::max(h, point_to_set(y, a));
  return h;
}

/// inf{eps > 0 : A ⊆ N_eps(B), B ⊆ N_eps(A)} by bisection on a monotone predicate.
inline double hausdorff_inf_eps(const std::function<bool(double)>& both_inclusions, double upper) {
  double lo = 0.0, hi = std::max(upper, 1e-300);
  while (!both_inclusions(hi)) hi *= 2;
  for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (both_inclusions(mid) ? hi : lo) = mid;
  }
  return hi;
}

/// Euclidean distance from x to con(vertices): the nearest point lies in the relative interior
/// of a face spanned by at most dim+1 vertices, so enumerate those subsets and keep the affine
/// projections with nonnegative barycentric weights.
inline double hull_distance(const Vec& x, const std::vector<Vec>& vertices) {
  const int n = static_cast<int>(vertices.size());
  const int d = static_cast<int>(x.size());
  double best = point_to_set(x, vertices);
  std::vector<int> idx;
  std::function<void(int)> rec = [&](int start) {
    if (idx.size() >= 2) {
      const int k = static_cast<int>(idx.size());
      Eigen::MatrixXd m(d, k - 1);
      for (int j = 1; j < k; ++j) m.col(j - 1) = vertices[static_cast<std::size_t>(idx[static_cast<std::size_t>(j)])] - vertices[static_cast<std::size_t>(idx[0])];
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m);
      if (qr.rank() == k - 1) {
        const Vec mu = qr.solve(x - vertices[static_cast<std::size_t>(idx[0])]);
        const double l0 = 1.0 - mu.sum();
        if (l0 >= -1e-14 && (mu.array() >= -1e-14).all()) {
          const Vec p = vertices[static_cast<std::size_t>(idx[0])] + m * mu;
          best = std::min(best, (x - p).norm());
        }
      }
    }
    if (static_cast<int>(idx.size()) == d + 1) return;
    for (int i = start; i < n; ++i) {
      idx.push_back(i);
      rec(i + 1);
      idx.pop_back();
    }
  };
  rec(0);
  return best;
}

/// Per-atom profile chosen by exhaustive enumeration: the joint node with the smallest worst regret
/// (ties within 1e-12 go to the lowest index); also returns that regret.
struct BruteForceProfile {
  std::vector<std::size_t> nodes;
  std::vector<double> worst_regret;
};

/// u(i, t, joint) on joint nodes; deviate(joint, i, y) replaces player i's node.
inline BruteForceProfile brute_force_equilibrium(
    std::size_t atoms, std::size_t players, std::size_t joint_size, const std::vector<std::size_t>& player_sizes,
    const std::function<double(std::size_t, std::size_t, std::size_t)>& u,
    const std::function<std::size_t(std::size_t, std::size_t, std::size_t)>& deviate) {
  BruteForceProfile out;
  for (std::size_t t = 0; t < atoms; ++t) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t x = 0; x < joint_size; ++x) {
      double worst = 0.0;
      for (std::size_t i = 0; i < players; ++i) {
        double br = -std::numeric_limits<double>::infinity();
        for (std::size_t y = 0; y < player_sizes[i]; ++y) br = std::max(br, u(i, t, deviate(x, i, y)));
        worst = std::max(worst, br - u(i, t, x));
      }
      if (worst < best - 1e-12) {
        best = worst;
        arg = x;
      }
    }
    out.nodes.push_back(arg);
    out.worst_regret.push_back(best);
  }
  return out;
}

}  // namespace oracle
