#pragma once

// Random instance generators shared by the unit and acceptance suites.

#include "superior/feasibility.hpp"

#include <initializer_list>
#include <random>
#include <vector>

namespace superior::testing {

using Vec = Point<double>;
using Rng = std::mt19937_64;

inline Vec vec(std::initializer_list<double> values) {
    Vec v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index j = 0;
    for (double x : values) v[j++] = x;
    return v;
}

inline Vec random_point(Rng& rng, Eigen::Index dim, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    Vec x(dim);
    for (Eigen::Index j = 0; j < dim; ++j) x[j] = n(rng);
    return x;
}

inline Vec random_unit(Rng& rng, Eigen::Index dim) {
    Vec v = random_point(rng, dim);
    return v / v.norm();
}

struct ConsistentSystem {
    FeasibilityProblem<double> problem;
    Vec solution;
};

/// `num_sets` hyperplanes with Gaussian normals passing through a common Gaussian point.
inline ConsistentSystem random_hyperplane_system(Rng& rng, Eigen::Index dim, std::size_t num_sets) {
    const Vec solution = random_point(rng, dim);
    std::vector<ConvexSet<double>> sets;
    for (std::size_t i = 0; i < num_sets; ++i) {
        const Vec a = random_point(rng, dim);
        sets.emplace_back(Hyperplane<double>(a, a.dot(solution)));
    }
    return {FeasibilityProblem<double>(std::move(sets)), solution};
}

/// The two coordinate axes of R^2 as hyperplanes: C_0 = {x2 = 0}, C_1 = {x1 = 0}.
inline FeasibilityProblem<double> axes_problem() {
    std::vector<ConvexSet<double>> sets;
    sets.emplace_back(Hyperplane<double>(vec({0.0, 1.0}), 0.0));
    sets.emplace_back(Hyperplane<double>(vec({1.0, 0.0}), 0.0));
    return FeasibilityProblem<double>(std::move(sets));
}

}  // namespace superior::testing
