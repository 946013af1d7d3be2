#pragma once

#include "superior/feasibility.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numeric>
#include <vector>

namespace superior {

// Set indices are 0-based throughout. Compositions apply their first listed element first:
// an index vector (t1, ..., tN) applies P_{t1} to x, then P_{t2}, and so on; a block scheme
// applies block 0 first.

using IndexVector = std::vector<std::size_t>;

inline void validate_indices(const IndexVector& t, std::size_t num_sets) {
    if (t.empty()) throw std::invalid_argument("index vector must be nonempty");
    for (auto i : t)
        if (i >= num_sets)
            throw std::out_of_range("set index " + std::to_string(i) + " out of range for " +
                                    std::to_string(num_sets) + " sets");
}

/// Index vectors with positive weights summing to one; fit when every set index occurs.
struct Amalgamator {
    std::vector<IndexVector> strings;
    std::vector<double> weights;

    /// The single full sweep (0, ..., I-1) with weight 1.
    static Amalgamator sequential(std::size_t num_sets) {
        IndexVector t(num_sets);
        std::iota(t.begin(), t.end(), std::size_t{0});
        return {{std::move(t)}, {1.0}};
    }

    void validate(std::size_t num_sets) const {
        if (strings.empty()) throw std::invalid_argument("amalgamator needs at least one index vector");
        if (strings.size() != weights.size())
            throw std::invalid_argument("amalgamator needs one weight per index vector");
        std::vector<bool> seen(num_sets, false);
        for (const auto& t : strings) {
            validate_indices(t, num_sets);
            for (auto i : t) seen[i] = true;
        }
        if (std::find(seen.begin(), seen.end(), false) != seen.end())
            throw std::invalid_argument("amalgamator is not fit: some set index never occurs");
        CompensatedSum<double> total;
        for (double w : weights) {
            if (!(w > 0)) throw std::invalid_argument("amalgamator weights must be positive");
            total.add(w);
        }
        if (std::abs(total.value() - 1.0) > 1e-12)
            throw std::invalid_argument("amalgamator weights must sum to 1");
    }
};

/// Ordered blocks of set indices; R is the largest block size.
class BlockScheme {
public:
    explicit BlockScheme(std::vector<IndexVector> blocks) : blocks_(std::move(blocks)) {
        if (blocks_.empty()) throw std::invalid_argument("block scheme needs at least one block");
        for (const auto& b : blocks_) {
            if (b.empty()) throw std::invalid_argument("blocks must be nonempty");
            max_block_ = std::max(max_block_, b.size());
        }
    }

    /// One block per consecutive run of `block_size` indices.
    static BlockScheme contiguous(std::size_t num_sets, std::size_t block_size) {
        if (block_size == 0) throw std::invalid_argument("block size must be positive");
        std::vector<IndexVector> blocks;
        for (std::size_t start = 0; start < num_sets; start += block_size) {
            IndexVector b;
            for (std::size_t i = start; i < std::min(num_sets, start + block_size); ++i) b.push_back(i);
            blocks.push_back(std::move(b));
        }
        return BlockScheme(std::move(blocks));
    }

    std::size_t size() const { return blocks_.size(); }
    std::size_t max_block_size() const { return max_block_; }
    const IndexVector& operator[](std::size_t u) const { return blocks_[u]; }
    const std::vector<IndexVector>& blocks() const { return blocks_; }

    /// Checks index ranges and that the blocks cover every set.
    void validate(std::size_t num_sets) const {
        std::vector<bool> seen(num_sets, false);
        for (const auto& b : blocks_) {
            validate_indices(b, num_sets);
            for (auto i : b) seen[i] = true;
        }
        if (std::find(seen.begin(), seen.end(), false) != seen.end())
            throw std::invalid_argument("block scheme does not cover every set index");
    }

private:
    std::vector<IndexVector> blocks_;
    std::size_t max_block_ = 0;
};

/// P_{t_N} ... P_{t_1} x, applied t_1 first.
template <typename Scalar>
Point<Scalar> compose_projections(const PointArg<Scalar>& x, const IndexVector& t,
                                  const FeasibilityProblem<Scalar>& problem) {
    validate_indices(t, problem.size());
    detail::check_dim(problem.dim(), x);
    Point<Scalar> y = x;
    for (auto i : t) project_in_place(y, problem[i]);
    return y;
}

/// sum_t w(t) P[t] x.
template <typename Scalar>
Point<Scalar> sap_apply(const PointArg<Scalar>& x, const Amalgamator& amalgamator,
                        const FeasibilityProblem<Scalar>& problem) {
    amalgamator.validate(problem.size());
    detail::check_dim(problem.dim(), x);
    if (amalgamator.strings.size() == 1) return compose_projections(x, amalgamator.strings.front(), problem);
    Point<Scalar> out = Point<Scalar>::Zero(x.size());
    for (std::size_t s = 0; s < amalgamator.strings.size(); ++s)
        out += Scalar(amalgamator.weights[s]) * compose_projections(x, amalgamator.strings[s], problem);
    return out;
}

/// Q_u x = (1/R) sum_{i in B_u} P_i x + ((R - |B_u|)/R) x, evaluated as x + (1/R) sum (P_i x - x).
template <typename Scalar>
Point<Scalar> bip_block_apply(const PointArg<Scalar>& x, std::size_t u, const BlockScheme& scheme,
                              const FeasibilityProblem<Scalar>& problem) {
    if (u >= scheme.size())
        throw std::out_of_range("block index " + std::to_string(u) + " out of range");
    const auto& block = scheme[u];
    validate_indices(block, problem.size());
    detail::check_dim(problem.dim(), x);
    const Scalar inv_r = Scalar(1) / Scalar(scheme.max_block_size());
    Point<Scalar> out = x;
    for (auto i : block) accumulate_displacement(x, problem[i], inv_r, out);
    return out;
}

/// Q_U ... Q_1 x, block 0 first.
template <typename Scalar>
Point<Scalar> bip_apply(const PointArg<Scalar>& x, const BlockScheme& scheme,
                        const FeasibilityProblem<Scalar>& problem) {
    scheme.validate(problem.size());
    detail::check_dim(problem.dim(), x);
    Point<Scalar> y = x;
    for (std::size_t u = 0; u < scheme.size(); ++u) y = bip_block_apply(y, u, scheme, problem);
    return y;
}

/// A map R^J -> R^J applied once per iteration of a feasibility-seeking algorithm.
template <typename Scalar>
class AlgorithmicOperator {
public:
    virtual ~AlgorithmicOperator() = default;
    virtual Point<Scalar> apply(const PointArg<Scalar>& x) const = 0;
    virtual Eigen::Index dim() const = 0;
    Point<Scalar> operator()(const PointArg<Scalar>& x) const { return apply(x); }
};

/// String-averaging projections.
template <typename Scalar>
class SapOperator final : public AlgorithmicOperator<Scalar> {
public:
    SapOperator(const FeasibilityProblem<Scalar>& problem, Amalgamator amalgamator)
        : problem_(problem), amalgamator_(std::move(amalgamator)) {
        amalgamator_.validate(problem_.size());
    }

    Point<Scalar> apply(const PointArg<Scalar>& x) const override {
        detail::check_dim(problem_.dim(), x);
        if (amalgamator_.strings.size() == 1) {
            Point<Scalar> y = x;
            for (auto i : amalgamator_.strings.front()) project_in_place(y, problem_[i]);
            return y;
        }
        Point<Scalar> out = Point<Scalar>::Zero(x.size());
        for (std::size_t s = 0; s < amalgamator_.strings.size(); ++s) {
            Point<Scalar> y = x;
            for (auto i : amalgamator_.strings[s]) project_in_place(y, problem_[i]);
            out += Scalar(amalgamator_.weights[s]) * y;
        }
        return out;
    }
    Eigen::Index dim() const override { return problem_.dim(); }
    const Amalgamator& amalgamator() const { return amalgamator_; }

private:
    const FeasibilityProblem<Scalar>& problem_;
    Amalgamator amalgamator_;
};

/// Block-iterative projections.
template <typename Scalar>
class BipOperator final : public AlgorithmicOperator<Scalar> {
public:
    BipOperator(const FeasibilityProblem<Scalar>& problem, BlockScheme scheme)
        : problem_(problem), scheme_(std::move(scheme)) {
        scheme_.validate(problem_.size());
    }

    Point<Scalar> apply(const PointArg<Scalar>& x) const override {
        detail::check_dim(problem_.dim(), x);
        const Scalar inv_r = Scalar(1) / Scalar(scheme_.max_block_size());
        Point<Scalar> y = x;
        Point<Scalar> next;
        std::vector<Scalar> alpha;
        std::vector<const SparseNormal<Scalar>*> normals;
        for (const auto& block : scheme_.blocks()) {
            alpha.resize(block.size());
            normals.resize(block.size());
            bool sparse = true;
            for (std::size_t j = 0; j < block.size() && sparse; ++j)
                sparse = (normals[j] = scaled_normal_step(y, problem_[block[j]], inv_r, alpha[j])) != nullptr;
            if (sparse) {
                // Every step was evaluated at y, so y can take them in place.
                for (std::size_t j = 0; j < block.size(); ++j)
                    if (alpha[j] != Scalar(0)) detail::sparse_axpy(alpha[j], *normals[j], y);
                continue;
            }
            next = y;
            for (auto i : block) accumulate_displacement(y, problem_[i], inv_r, next);
            y.swap(next);
        }
        return y;
    }
    Eigen::Index dim() const override { return problem_.dim(); }
    const BlockScheme& scheme() const { return scheme_; }

private:
    const FeasibilityProblem<Scalar>& problem_;
    BlockScheme scheme_;
};

template <typename Scalar>
class IdentityOperator final : public AlgorithmicOperator<Scalar> {
public:
    explicit IdentityOperator(Eigen::Index dim) : dim_(dim) {}
    Point<Scalar> apply(const PointArg<Scalar>& x) const override {
        detail::check_dim(dim_, x);
        return x;
    }
    Eigen::Index dim() const override { return dim_; }

private:
    Eigen::Index dim_;
};

/// beta * v with beta >= 0 and ||v|| <= 1.
template <typename Scalar>
struct PerturbationStep {
    Scalar beta = 0;
    Point<Scalar> direction;

    void validate(Eigen::Index dim) const {
        if (!(beta >= Scalar(0))) throw std::invalid_argument("perturbation beta must be nonnegative");
        detail::check_dim(dim, direction);
        if (!(direction.norm() <= Scalar(1) + Scalar(1e-12)))
            throw std::invalid_argument("perturbation direction must have norm <= 1");
    }
};

/// op(x + beta v).
template <typename Scalar>
Point<Scalar> perturbed_iterate(const PointArg<Scalar>& x, const PerturbationStep<Scalar>& step,
                                const AlgorithmicOperator<Scalar>& op) {
    detail::check_dim(op.dim(), x);
    step.validate(op.dim());
    if (step.beta == Scalar(0)) return op(x);
    return op(x + step.beta * step.direction);
}

/// Produces the k-th perturbation given the current iterate.
template <typename Scalar>
using PerturbationGenerator = std::function<PerturbationStep<Scalar>(std::size_t k, const PointArg<Scalar>& x)>;

template <typename Scalar>
struct ResilienceReport {
    std::vector<Scalar> proximity_trace;  // Pr(x^0), ..., Pr(x^iterations)
    Point<Scalar> final_point;
    Scalar final_proximity = 0;
    std::size_t iterations = 0;
    bool reached_target = false;
    Scalar beta_sum = 0;
};

/// Runs x^{k+1} = op(x^k + beta_k v^k) for up to `budget` iterations, stopping early once
/// Pr <= target.
template <typename Scalar>
ResilienceReport<Scalar> resilience_trial(const FeasibilityProblem<Scalar>& problem,
                                          const AlgorithmicOperator<Scalar>& op, const Point<Scalar>& start,
                                          const PerturbationGenerator<Scalar>& generator, std::size_t budget,
                                          Scalar target) {
    detail::check_dim(problem.dim(), start);
    ResilienceReport<Scalar> report;
    Point<Scalar> x = start;
    Scalar pr = proximity(problem, x);
    report.proximity_trace.push_back(pr);
    CompensatedSum<Scalar> beta_sum;
    for (std::size_t k = 0; k < budget && pr > target; ++k) {
        const auto step = generator(k, x);
        x = perturbed_iterate(x, step, op);
        beta_sum.add(step.beta);
        pr = proximity(problem, x);
        report.proximity_trace.push_back(pr);
        ++report.iterations;
    }
    report.final_point = std::move(x);
    report.final_proximity = pr;
    report.reached_target = pr <= target;
    report.beta_sum = beta_sum.value();
    return report;
}

/// beta_k = scale * ratio^k with a direction chosen by `direction(k, x)`.
template <typename Scalar>
PerturbationGenerator<Scalar> geometric_perturbations(
    Scalar scale, Scalar ratio, std::function<Point<Scalar>(std::size_t, const Point<Scalar>&)> direction) {
    if (!(scale >= 0) || !(ratio > 0 && ratio < 1))
        throw std::invalid_argument("geometric schedule needs scale >= 0 and 0 < ratio < 1");
    return [=](std::size_t k, const PointArg<Scalar>& x) {
        return PerturbationStep<Scalar>{scale * std::pow(ratio, Scalar(k)), direction(k, x)};
    };
}

}  // namespace superior
