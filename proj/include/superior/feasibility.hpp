#pragma once

#include "superior/convex_sets.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace superior {

/// Neumaier-compensated running sum; the result is independent of magnitude ordering effects
/// to well below 1e-10 relative for the sums used here.
template <typename Scalar>
class CompensatedSum {
public:
    void add(Scalar v) {
        const Scalar t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }
    Scalar value() const { return sum_ + comp_; }

private:
    Scalar sum_ = 0;
    Scalar comp_ = 0;
};

/// A convex feasibility problem: find x in the intersection of all sets.
template <typename Scalar>
class FeasibilityProblem {
public:
    explicit FeasibilityProblem(std::vector<ConvexSet<Scalar>> sets) : sets_(std::move(sets)) {
        if (sets_.empty()) throw std::invalid_argument("feasibility problem needs at least one set");
        dim_ = ambient_dim(sets_.front());
        for (const auto& c : sets_)
            if (ambient_dim(c) != dim_) throw DimensionMismatch(dim_, ambient_dim(c));
    }

    std::size_t size() const { return sets_.size(); }
    Eigen::Index dim() const { return dim_; }
    const ConvexSet<Scalar>& operator[](std::size_t i) const { return sets_[i]; }
    const ConvexSet<Scalar>& at(std::size_t i) const {
        if (i >= sets_.size()) throw std::out_of_range("set index " + std::to_string(i) + " out of range");
        return sets_[i];
    }
    std::span<const ConvexSet<Scalar>> sets() const { return sets_; }

private:
    std::vector<ConvexSet<Scalar>> sets_;
    Eigen::Index dim_ = 0;
};

/// sqrt(sum_i d(x, C_i)^2), streamed over the sets.
template <typename Scalar>
Scalar proximity(const FeasibilityProblem<Scalar>& problem, const PointArg<Scalar>& x) {
    detail::check_dim(problem.dim(), x);
    CompensatedSum<Scalar> acc;
    for (const auto& c : problem.sets()) {
        const Scalar d = distance(x, c);
        acc.add(d * d);
    }
    return std::sqrt(acc.value());
}

template <typename Scalar>
bool is_solution(const FeasibilityProblem<Scalar>& problem, const PointArg<Scalar>& x) {
    return proximity(problem, x) <= Scalar(1e-9) * (Scalar(1) + x.norm());
}

struct StoppingCriterion {
    double epsilon = 0.01;
    std::size_t max_outer_iterations = 10000;

    void validate() const {
        if (!(epsilon > 0)) throw std::invalid_argument("epsilon must be positive");
        if (max_outer_iterations < 1) throw std::invalid_argument("max_outer_iterations must be >= 1");
    }
};

/// One element x^k of an iterate sequence together with its proximity.
template <typename Scalar>
struct Iterate {
    std::size_t k = 0;
    Point<Scalar> x;
    Scalar proximity = 0;
};

/// Lazily produced iterate stream; returns std::nullopt once the source is exhausted.
template <typename Scalar>
using IterateSource = std::function<std::optional<Iterate<Scalar>>()>;

template <typename Scalar>
struct OutputResult {
    /// The selected iterate, or empty when the output is undefined within the budget.
    std::optional<Iterate<Scalar>> output;
    /// Number of iterates inspected.
    std::size_t scanned = 0;
    /// Last inspected iterate (present whenever scanned > 0).
    std::optional<Iterate<Scalar>> last;

    bool defined() const { return output.has_value(); }
};

/// First K with Pr(x^K) <= eps. Inspects at most max_outer_iterations + 1 iterates
/// (x^0 .. x^budget); the output is undefined if none qualifies or the source ends first.
template <typename Scalar>
OutputResult<Scalar> output_operator(const StoppingCriterion& stop, const IterateSource<Scalar>& next) {
    stop.validate();
    OutputResult<Scalar> result;
    while (result.scanned <= stop.max_outer_iterations) {
        auto it = next();
        if (!it) break;
        ++result.scanned;
        if (it->proximity <= Scalar(stop.epsilon)) {
            result.output = *it;
            result.last = std::move(it);
            return result;
        }
        result.last = std::move(it);
    }
    return result;
}

/// Variant recomputing proximity from the problem for each point of a plain point stream.
template <typename Scalar>
OutputResult<Scalar> output_operator(const FeasibilityProblem<Scalar>& problem, const StoppingCriterion& stop,
                                     const std::function<std::optional<Point<Scalar>>()>& next_point) {
    std::size_t k = 0;
    IterateSource<Scalar> source = [&]() -> std::optional<Iterate<Scalar>> {
        auto x = next_point();
        if (!x) return std::nullopt;
        const Scalar pr = proximity(problem, *x);
        return Iterate<Scalar>{k++, std::move(*x), pr};
    };
    return output_operator(stop, source);
}

/// Index of the first trace entry <= eps among the first max_outer_iterations + 1 entries.
template <typename Scalar>
std::optional<std::size_t> first_within(std::span<const Scalar> trace, const StoppingCriterion& stop) {
    stop.validate();
    const std::size_t n = std::min(trace.size(), stop.max_outer_iterations + 1);
    for (std::size_t k = 0; k < n; ++k)
        if (trace[k] <= Scalar(stop.epsilon)) return k;
    return std::nullopt;
}

}  // namespace superior
