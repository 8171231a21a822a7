#include <doctest.h>

#include <random>

#include "carasel/errors.hpp"
#include "carasel/setops.hpp"
#include "support/instances.hpp"
#include "support/oracles.hpp"

using namespace carasel;

namespace {

ConvexSet unit_square() {
  return ConvexSet(2, {make_vec({0, 0}), make_vec({1, 0}), make_vec({0, 1}), make_vec({1, 1})});
}

}  // namespace

TEST_SUITE("setops") {
  TEST_CASE("hausdorff_dist examples") {
    CHECK(hausdorff_dist(PointSet::of({{0, 0}}), PointSet::of({{0, 0}})) == 0.0);
    CHECK(hausdorff_dist(PointSet::of({{0}, {2}}), PointSet::of({{1}})) == doctest::Approx(1.0));
    CHECK(hausdorff_dist(PointSet::of({{0, 0}}), PointSet::of({{0, 0}, {3, 4}})) == doctest::Approx(5.0));
    CHECK_THROWS_AS(hausdorff_dist(PointSet(1), PointSet::of({{0}})), DomainError);
    CHECK_THROWS_AS(hausdorff_dist(PointSet::of({{0}}), PointSet::of({{0, 0}})), DomainError);
  }

  TEST_CASE("point sets drop near-duplicates") {
    const PointSet p(1, {make_vec({0.0}), make_vec({1e-13}), make_vec({1.0})});
    CHECK(p.size() == 2);
    CHECK(p.has_point_near(make_vec({1.0 + 1e-10}), 1e-9));
  }

  TEST_CASE("eps_neighborhood_contains examples") {
    CHECK(eps_neighborhood_contains(PointSet::of({{0.5}}), PointSet::of({{0}, {1}}), 0.6));
    CHECK(eps_neighborhood_contains(PointSet(1), PointSet::of({{0}}), 0.1));
    CHECK_FALSE(eps_neighborhood_contains(PointSet::of({{2}}), PointSet::of({{0}}), 1.0));
    // Open neighbourhood: distance exactly eps is outside.
    CHECK_FALSE(eps_neighborhood_contains(PointSet::of({{1}}), PointSet::of({{0}}), 1.0));
  }

  TEST_CASE("convex_membership examples") {
    const auto sq = unit_square();
    CHECK(convex_membership(make_vec({0.5, 0.5}), sq, 0.0));
    CHECK_FALSE(convex_membership(make_vec({2, 0}), sq, 1e-9));
    for (const auto& v : sq.vertices()) CHECK(convex_membership(v, sq, 0.0));
    CHECK_THROWS_AS(convex_membership(make_vec({0.5}), sq, 0.0), DomainError);
    CHECK(membership_residual(make_vec({2, 0}), sq) == doctest::Approx(1.0));
  }

  TEST_CASE("convex_membership is monotone in tol and agrees with subset enumeration") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
      const int dim = static_cast<int>(gen::pick(rng, 1, 3));
      const auto verts = gen::random_polytope(rng, dim);
      const ConvexSet c(dim, verts);
      const Vec x = gen::random_vec(rng, dim, -1.5, 1.5);
      const double ref = oracle::hull_distance(x, verts);
      CHECK(membership_residual(x, c) == doctest::Approx(ref).epsilon(1e-7).scale(1.0));
      bool prev = false;
      for (double tol : {0.0, 1e-9, 1e-3, 0.1, 1.0, 10.0}) {
        const bool in = convex_membership(x, c, tol);
        CHECK((!prev || in));
        prev = in;
      }
      for (const auto& v : verts) CHECK(convex_membership(v, c, 0.0));
    }
  }

  TEST_CASE("interior_point_margin examples") {
    const ConvexSet seg(1, {make_vec({0}), make_vec({1})});
    CHECK(interior_point_margin(make_vec({0.5}), seg) == doctest::Approx(0.5));
    CHECK(interior_point_margin(make_vec({0}), ConvexSet(1, {make_vec({0})})) == 0.0);
    CHECK(interior_point_margin(make_vec({0, 0}), unit_square()) == 0.0);
    CHECK(interior_point_margin(make_vec({0.5, 0.5}), unit_square()) == doctest::Approx(0.5));
    CHECK(interior_point_margin(make_vec({2, 2}), unit_square()) == 0.0);
    // A segment in the plane has empty ambient interior.
    CHECK(interior_point_margin(make_vec({0.5, 0}), ConvexSet(2, {make_vec({0, 0}), make_vec({1, 0})})) == 0.0);
  }

  TEST_CASE("positive margin implies membership at tol 0") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 200; ++trial) {
      const int dim = static_cast<int>(gen::pick(rng, 1, 3));
      const auto verts = gen::random_polytope(rng, dim);
      const ConvexSet c(dim, verts);
      const Vec x = gen::random_vec(rng, dim, -1.0, 1.0);
      if (interior_point_margin(x, c) > 0) CHECK(convex_membership(x, c, 0.0));
    }
  }

  TEST_CASE("projection onto a hull is optimal") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 100; ++trial) {
      const int dim = static_cast<int>(gen::pick(rng, 1, 3));
      const auto verts = gen::random_polytope(rng, dim);
      const Vec x = gen::random_vec(rng, dim, -2, 2);
      const auto p = project_onto_hull(x, verts);
      // Variational inequality: (x − p)·(v − p) ≤ 0 for every vertex v.
      for (const auto& v : verts) CHECK((x - p.point).dot(v - p.point) <= 1e-10);
    }
  }

  TEST_CASE("extreme points and affine rank") {
    const std::vector<Vec> pts = {make_vec({0, 0}), make_vec({1, 0}), make_vec({0.5, 0.2}), make_vec({0, 1}), make_vec({1, 1})};
    CHECK(extreme_points(pts).size() == 4);
    CHECK(affine_rank(pts) == 2);
    CHECK(affine_rank(std::vector<Vec>{make_vec({0, 0}), make_vec({1, 1}), make_vec({2, 2})}) == 1);
  }

  TEST_CASE("li/ls of a convergent singleton sequence") {
    std::vector<PointSet> terms;
    for (int n = 1; n <= 20; ++n) terms.push_back(PointSet::of({{1.0 / n}}));
    const SetSequence s(1, terms);
    const auto li = li_limit(s, 10, 0.05);
    const auto ls = ls_limit(s, 10, 0.05);
    CHECK_FALSE(li.empty());
    CHECK_FALSE(ls.empty());
    CHECK(eps_neighborhood_contains(li, ls, 1e-12));
  }

  TEST_CASE("li/ls of an alternating sequence") {
    std::vector<PointSet> terms;
    for (int n = 0; n < 20; ++n) terms.push_back(n % 2 ? PointSet::of({{1}}) : PointSet::of({{0}}));
    const SetSequence s(1, terms);
    CHECK(li_limit(s, 10).empty());
    const auto ls = ls_limit(s, 10);
    CHECK(ls.has_point_near(make_vec({0}), 1e-12));
    CHECK(ls.has_point_near(make_vec({1}), 1e-12));
  }

  TEST_CASE("li/ls of a constant sequence") {
    const auto a = PointSet::of({{0, 1}, {2, 3}});
    const SetSequence s(2, std::vector<PointSet>(6, a));
    CHECK(same_points(li_limit(s, 4), a, 1e-12));
    CHECK(same_points(ls_limit(s, 4), a, 1e-12));
  }

  TEST_CASE("li is contained in ls on random sequences") {
    std::mt19937_64 rng(14);
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<PointSet> terms;
      for (int n = 0; n < 12; ++n) {
        std::vector<Vec> pts;
        for (int k = 0; k < 3; ++k) pts.push_back(make_vec({static_cast<double>(gen::pick(rng, 0, 4))}));
        terms.emplace_back(1, pts);
      }
      const SetSequence s(1, terms);
      const auto li = li_limit(s, 8);
      const auto ls = ls_limit(s, 8);
      for (const auto& p : li.points()) CHECK(ls.has_point_near(p, 1e-12));
    }
  }

  TEST_CASE("li/ls argument errors") {
    const SetSequence s(1, {PointSet::of({{0}})});
    CHECK_THROWS_AS(li_limit(s, 0), DomainError);
    CHECK_THROWS_AS(ls_limit(s, 2), DomainError);
  }
}
