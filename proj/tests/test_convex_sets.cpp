#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "superior/convex_sets.hpp"
#include "test_support.hpp"

#include <functional>

using namespace superior;
using namespace superior::testing;

namespace {

// Grid search over a parameterization z(u) of the set: evaluate ||x - z(u)|| on a
// 21^d lattice, recentre on the best admissible sample, shrink the radius, repeat.
// `center` must be admissible.
Vec grid_search_nearest(const Vec& x, Vec center, double radius, const std::function<Vec(const Vec&)>& z_of,
                        const std::function<bool(const Vec&)>& admissible) {
    const auto dims = static_cast<int>(center.size());
    constexpr int kSide = 21;
    for (int round = 0; round < 100; ++round) {
        const double step = radius / 10.0;
        Vec best = center;
        double best_d = std::numeric_limits<double>::infinity();
        Vec u(dims);
        const int total = dims == 2 ? kSide * kSide : kSide * kSide * kSide;
        for (int n = 0; n < total; ++n) {
            int rem = n;
            for (int d = 0; d < dims; ++d) {
                u[d] = center[d] + (rem % kSide - kSide / 2) * step;
                rem /= kSide;
            }
            if (!admissible(u)) continue;
            const double dist = (x - z_of(u)).norm();
            if (dist < best_d) {
                best_d = dist;
                best = u;
            }
        }
        center = best;
        radius *= 0.7;
    }
    return z_of(center);
}

// Orthonormal basis of the complement of a in R^3.
std::pair<Vec, Vec> complement_basis(const Vec& a) {
    Eigen::Matrix3d m;
    m.col(0) = a.normalized();
    m.col(1) = Eigen::Vector3d::UnitX();
    m.col(2) = Eigen::Vector3d::UnitY();
    if (std::abs(a.normalized().dot(Eigen::Vector3d::UnitX())) > 0.9) m.col(1) = Eigen::Vector3d::UnitZ();
    if (std::abs(a.normalized().dot(Eigen::Vector3d::UnitY())) > 0.9) m.col(2) = Eigen::Vector3d::UnitZ();
    Eigen::HouseholderQR<Eigen::Matrix3d> qr(m);
    const Eigen::Matrix3d q = qr.householderQ();
    return {q.col(1), q.col(2)};
}

ConvexSet<double> hyperplane(std::initializer_list<double> a, double b) { return Hyperplane<double>(vec(a), b); }

}  // namespace

TEST_CASE("hyperplane projection examples") {
    CHECK(project(vec({3, 4}), hyperplane({1, 0}, 0)).isApprox(vec({0, 4})));
    CHECK(project(vec({1, 1}), hyperplane({2, -1}, 1)) == vec({1, 1}));

    const Vec a = vec({1, 1});
    const Vec p = project(vec({2, 2}), hyperplane({1, 1}, 2));
    CHECK(a.dot(p) == doctest::Approx(2.0));
    const Vec diff = vec({2, 2}) - p;
    CHECK(diff[0] * a[1] - diff[1] * a[0] == doctest::Approx(0.0));  // parallel to a
    CHECK(p.isApprox(vec({1, 1})));
}

TEST_CASE("distance examples") {
    CHECK(distance(vec({1, 1}), hyperplane({2, -1}, 1)) == 0.0);
    CHECK(distance(vec({3, 4}), hyperplane({0, 1}, 0)) == doctest::Approx(4.0));
    CHECK(distance(vec({2, 2}), hyperplane({1, 1}, 2)) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("half-space and box projections") {
    const ConvexSet<double> h = HalfSpace<double>(vec({1, 0}), 1.0);
    CHECK(project(vec({0.5, 3}), h) == vec({0.5, 3}));
    CHECK(project(vec({4, 3}), h).isApprox(vec({1, 3})));
    CHECK(distance(vec({4, 3}), h) == doctest::Approx(3.0));

    const ConvexSet<double> box = Box<double>(vec({0, 0}), vec({1, 2}));
    CHECK(project(vec({-1, 5}), box) == vec({0, 2}));
    CHECK(distance(vec({-1, 5}), box) == doctest::Approx(std::sqrt(10.0)));
    CHECK(contains(box, vec({0.5, 1.0})));
    CHECK_FALSE(contains(box, vec({1.5, 1.0})));
}

TEST_CASE("construction and dimension errors") {
    CHECK_THROWS_AS(Hyperplane<double>(vec({0, 0}), 1.0), std::invalid_argument);
    CHECK_THROWS_AS(HalfSpace<double>(vec({0, 0, 0}), 1.0), std::invalid_argument);
    CHECK_THROWS_AS(Box<double>(vec({1, 0}), vec({0, 1})), std::invalid_argument);
    CHECK_THROWS_AS(Box<double>(vec({0}), vec({0, 1})), DimensionMismatch);
    CHECK_THROWS_AS(Hyperplane<double>(vec({1, std::nan("")}), 0.0), std::invalid_argument);

    const auto c = hyperplane({1, 0}, 0);
    CHECK_THROWS_AS(project(vec({1, 2, 3}), c), DimensionMismatch);
    CHECK_THROWS_AS(distance(vec({1}), c), DimensionMismatch);
}

TEST_CASE("sparse normals keep only nonzero entries in increasing order") {
    const Hyperplane<double> h(vec({0, 3, 0, 4}), 1.0);
    CHECK(h.normal().nonZeros() == 2);
    CHECK(h.normal_squared_norm() == 25.0);
    std::vector<Eigen::Index> idx;
    for (SparseNormal<double>::InnerIterator it(h.normal()); it; ++it) idx.push_back(it.index());
    CHECK(idx == std::vector<Eigen::Index>{1, 3});
}

TEST_CASE("membership tolerance is configurable") {
    const ConvexSet<double> loose = Hyperplane<double>(vec({1, 0}), 0.0, 1e-3);
    const ConvexSet<double> strict = Hyperplane<double>(vec({1, 0}), 0.0);
    CHECK(contains(loose, vec({5e-4, 1})));
    CHECK_FALSE(contains(strict, vec({5e-4, 1})));
}

TEST_CASE("projection properties on random instances") {
    Rng rng(1234);
    for (int trial = 0; trial < 200; ++trial) {
        const Eigen::Index dim = 2 + trial % 6;
        const Vec a = random_point(rng, dim);
        const double b = std::normal_distribution<double>(0, 2)(rng);
        const Vec lo = random_point(rng, dim);
        const Vec hi = lo + random_point(rng, dim).cwiseAbs();
        const std::vector<ConvexSet<double>> sets{Hyperplane<double>(a, b), HalfSpace<double>(a, b), Box<double>(lo, hi)};
        const Vec x = random_point(rng, dim, 3.0), y = random_point(rng, dim, 3.0);
        for (const auto& c : sets) {
            const Vec px = project(x, c);
            CHECK(contains(c, px));
            CHECK((project(px, c) - px).norm() <= 1e-10);
            CHECK((px - project(y, c)).norm() <= (x - y).norm() + 1e-12);
            CHECK(distance(x, c) == doctest::Approx((x - px).norm()).epsilon(1e-12));
        }
        // Pythagoras against an arbitrary point on the hyperplane.
        const auto& h = sets[0];
        const Vec on_plane = project(random_point(rng, dim, 5.0), h);
        const double lhs = std::pow(distance(x, h), 2) + (project(x, h) - on_plane).squaredNorm();
        CHECK(lhs == doctest::Approx((x - on_plane).squaredNorm()).epsilon(1e-8));
    }
}

TEST_CASE("projection agrees with a grid-search nearest point in R^3") {
    Rng rng(99);
    for (int trial = 0; trial < 8; ++trial) {
        const Vec a = random_point(rng, 3);
        const double b = std::normal_distribution<double>(0, 1)(rng);
        const Vec x = random_point(rng, 3, 2.0);
        const auto [e1, e2] = complement_basis(a);
        const Vec p0 = b * a / a.squaredNorm();
        const double radius = 4.0 * (x.norm() + p0.norm() + 1.0);

        const Vec plane_best = grid_search_nearest(
            x, Vec::Zero(2), radius, [&](const Vec& u) { Vec z = p0 + u[0] * e1 + u[1] * e2; return z; },
            [](const Vec&) { return true; });
        CHECK((project(x, ConvexSet<double>(Hyperplane<double>(a, b))) - plane_best).norm() <= 1e-6);

        const Vec half_best = grid_search_nearest(
            x, Vec::Zero(3), radius, [&](const Vec& u) { Vec z = p0 + u[0] * e1 + u[1] * e2 - u[2] * a.normalized(); return z; },
            [](const Vec& u) { return u[2] >= 0; });
        CHECK((project(x, ConvexSet<double>(HalfSpace<double>(a, b))) - half_best).norm() <= 1e-6);

        const Vec lo = random_point(rng, 3), hi = lo + random_point(rng, 3).cwiseAbs();
        const Vec box_best = grid_search_nearest(
            x, Vec((lo + hi) / 2), radius, [](const Vec& u) { return u; },
            [&](const Vec& u) { return (u.array() >= lo.array()).all() && (u.array() <= hi.array()).all(); });
        CHECK((project(x, ConvexSet<double>(Box<double>(lo, hi))) - box_best).norm() <= 1e-6);
    }
}
