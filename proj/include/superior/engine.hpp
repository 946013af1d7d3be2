#pragma once

#include "superior/feasibility.hpp"
#include "superior/objectives.hpp"
#include "superior/operators.hpp"

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace superior {

/// Summable sequence of positive step sizes gamma_0, gamma_1, ...
///
/// Either geometric (gamma_l = scale * base^l) or an explicit table continued by a geometric
/// tail: gamma_{n-1+m} = table[n-1] * tail_ratio^m.
class GammaSequence {
public:
    static GammaSequence geometric(double base, double scale = 1.0) {
        if (!(base > 0 && base < 1)) throw std::invalid_argument("gamma base must lie in (0, 1)");
        if (!(scale > 0)) throw std::invalid_argument("gamma scale must be positive");
        GammaSequence g;
        g.ratio_ = base;
        g.table_ = {scale};
        return g;
    }

    static GammaSequence table(std::vector<double> values, double tail_ratio) {
        if (values.empty()) throw std::invalid_argument("gamma table must be nonempty");
        for (double v : values)
            if (!(v > 0)) throw std::invalid_argument("gamma values must be positive");
        if (!(tail_ratio > 0 && tail_ratio < 1)) throw std::invalid_argument("gamma tail ratio must lie in (0, 1)");
        GammaSequence g;
        g.ratio_ = tail_ratio;
        g.table_ = std::move(values);
        return g;
    }

    double operator()(std::size_t ell) const {
        const std::size_t n = table_.size();
        if (ell < n) return table_[ell];
        return table_.back() * std::pow(ratio_, static_cast<double>(ell - n + 1));
    }

    /// Exact value of sum_l gamma_l.
    double total() const {
        CompensatedSum<double> s;
        for (double v : table_) s.add(v);
        s.add(table_.back() * ratio_ / (1.0 - ratio_));
        return s.value();
    }

private:
    GammaSequence() = default;
    double ratio_ = 0.5;
    std::vector<double> table_;
};

/// One accepted outer iteration of the superiorized loop.
struct StepRecord {
    std::size_t k = 0;            // index of the iterate the step started from
    std::size_t ell = 0;          // gamma index used for the accepted beta
    std::size_t trials = 0;       // gamma indices consumed by this iteration
    double beta = 0;
    double direction_norm = 0;    // ||v^k||, either 0 or 1
    double objective_x = 0;       // phi(x^k)
    double objective_y = 0;       // phi(y) at acceptance
    double proximity_x = 0;       // Pr(x^k)
    double proximity_next = 0;    // Pr(P_T y) = Pr(x^{k+1})
};

using StepObserver = std::function<void(const StepRecord&)>;

/// Thrown when an outer iteration consumes its whole trial budget without accepting a step.
class InnerStall : public std::runtime_error {
public:
    InnerStall(std::size_t k, std::size_t ell)
        : std::runtime_error("no acceptable perturbation at iteration " + std::to_string(k) +
                             " (gamma index reached " + std::to_string(ell) + ")"),
          iteration(k),
          gamma_index(ell) {}
    std::size_t iteration;
    std::size_t gamma_index;
};

template <typename Scalar>
struct SuperiorizationState {
    std::size_t k = 0;
    std::size_t ell = 0;  // never reset between outer iterations
    Point<Scalar> x;
    Scalar proximity = 0;
};

template <typename Scalar>
struct RunConfig {
    Point<Scalar> initial_point;
    std::shared_ptr<const ConvexObjective<Scalar>> objective;
    GammaSequence gamma = GammaSequence::geometric(0.999);
    StoppingCriterion stop;
    std::size_t inner_budget = 500;
    bool record_history = false;

    void validate(Eigen::Index dim) const {
        detail::check_dim(dim, initial_point);
        if (!initial_point.allFinite()) throw std::invalid_argument("initial point must be finite");
        if (inner_budget < 1) throw std::invalid_argument("inner_budget must be >= 1");
        stop.validate();
    }
};

/// Lines (v)-(xvii) of the superiorized loop for one outer iteration: perturb along the
/// normalized negative subgradient with beta = gamma_ell, accept the first trial with
/// phi(y) <= phi(x^k) and Pr(P_T y) < Pr(x^k), then x^{k+1} = P_T y. ell advances on every trial.
template <typename Scalar>
SuperiorizationState<Scalar> superiorized_step(const SuperiorizationState<Scalar>& state,
                                               const AlgorithmicOperator<Scalar>& op,
                                               const FeasibilityProblem<Scalar>& problem,
                                               const ConvexObjective<Scalar>& objective,
                                               const GammaSequence& gamma, std::size_t inner_budget,
                                               StepRecord* record = nullptr) {
    if (inner_budget < 1) throw std::invalid_argument("inner_budget must be >= 1");
    const Point<Scalar>& x = state.x;
    Point<Scalar> v = objective.subgradient(x);
    const Scalar gnorm = v.norm();
    if (gnorm > Scalar(0)) v = -v / gnorm;
    const Scalar phi_x = objective.value(x);

    std::size_t ell = state.ell;
    for (std::size_t trial = 0; trial < inner_budget; ++trial, ++ell) {
        const Scalar beta = Scalar(gamma(ell));
        Point<Scalar> y = x + beta * v;
        const Scalar phi_y = objective.value(y);
        if (!(phi_y <= phi_x)) continue;
        Point<Scalar> next = op(y);
        const Scalar pr_next = proximity(problem, next);
        if (!(pr_next < state.proximity)) continue;

        if (record) {
            *record = StepRecord{state.k,
                                 ell,
                                 trial + 1,
                                 static_cast<double>(beta),
                                 gnorm > Scalar(0) ? 1.0 : 0.0,
                                 static_cast<double>(phi_x),
                                 static_cast<double>(phi_y),
                                 static_cast<double>(state.proximity),
                                 static_cast<double>(pr_next)};
        }
        return SuperiorizationState<Scalar>{state.k + 1, ell + 1, std::move(next), pr_next};
    }
    throw InnerStall(state.k, ell);
}

/// Lazy stream x^0 = x-bar, x^1, ... of the superiorized algorithm. Emission ends once an
/// emitted point is a solution, since no trial can then pass the strict proximity test.
template <typename Scalar>
class SuperiorizedSequence {
public:
    SuperiorizedSequence(const FeasibilityProblem<Scalar>& problem, const AlgorithmicOperator<Scalar>& op,
                         const RunConfig<Scalar>& cfg, StepObserver observer = {})
        : problem_(problem), op_(op), cfg_(cfg), observer_(std::move(observer)) {
        cfg_.validate(problem_.dim());
        if (!cfg_.objective) throw std::invalid_argument("superiorization needs an objective");
        state_.x = cfg_.initial_point;
        state_.proximity = proximity(problem_, state_.x);
    }

    std::optional<Iterate<Scalar>> next() {
        if (!started_) {
            started_ = true;
            return Iterate<Scalar>{state_.k, state_.x, state_.proximity};
        }
        if (finished_) return std::nullopt;
        if (state_.proximity <= Scalar(1e-9) * (Scalar(1) + state_.x.norm())) {
            finished_ = true;
            return std::nullopt;
        }
        StepRecord rec;
        state_ = superiorized_step(state_, op_, problem_, *cfg_.objective, cfg_.gamma, cfg_.inner_budget, &rec);
        if (cfg_.record_history) history_.push_back(rec);
        if (observer_) observer_(rec);
        return Iterate<Scalar>{state_.k, state_.x, state_.proximity};
    }

    const SuperiorizationState<Scalar>& state() const { return state_; }
    const std::vector<StepRecord>& history() const { return history_; }

private:
    const FeasibilityProblem<Scalar>& problem_;
    const AlgorithmicOperator<Scalar>& op_;
    RunConfig<Scalar> cfg_;
    StepObserver observer_;
    SuperiorizationState<Scalar> state_;
    std::vector<StepRecord> history_;
    bool started_ = false;
    bool finished_ = false;
};

/// Lazy stream x-bar, P_T x-bar, P_T^2 x-bar, ...
template <typename Scalar>
class PlainSequence {
public:
    PlainSequence(const FeasibilityProblem<Scalar>& problem, const AlgorithmicOperator<Scalar>& op,
                  const RunConfig<Scalar>& cfg, StepObserver observer = {})
        : problem_(problem), op_(op), observer_(std::move(observer)) {
        cfg.validate(problem_.dim());
        x_ = cfg.initial_point;
    }

    std::optional<Iterate<Scalar>> next() {
        if (started_) {
            x_ = op_(x_);
            ++k_;
        }
        const Scalar pr = proximity(problem_, x_);
        if (started_ && observer_) {
            StepRecord rec;
            rec.k = k_ - 1;
            rec.proximity_x = static_cast<double>(last_pr_);
            rec.proximity_next = static_cast<double>(pr);
            observer_(rec);
        }
        started_ = true;
        last_pr_ = pr;
        return Iterate<Scalar>{k_, x_, pr};
    }

private:
    const FeasibilityProblem<Scalar>& problem_;
    const AlgorithmicOperator<Scalar>& op_;
    StepObserver observer_;
    Point<Scalar> x_;
    std::size_t k_ = 0;
    Scalar last_pr_ = 0;
    bool started_ = false;
};

template <typename Scalar>
struct RunResult {
    OutputResult<Scalar> output;
    std::vector<Scalar> proximity_trace;
    std::vector<StepRecord> history;

    bool defined() const { return output.defined(); }
    /// Number of operator applications leading to the output (K), or to the last scanned point.
    std::size_t iterations() const {
        if (output.output) return output.output->k;
        return output.last ? output.last->k : 0;
    }
};

/// Runs the superiorized algorithm from cfg.initial_point and selects O(T, eps, S).
/// InnerStall propagates to the caller.
template <typename Scalar>
RunResult<Scalar> run_superiorized(const FeasibilityProblem<Scalar>& problem, const AlgorithmicOperator<Scalar>& op,
                                   const RunConfig<Scalar>& cfg, StepObserver observer = {}) {
    SuperiorizedSequence<Scalar> seq(problem, op, cfg, std::move(observer));
    RunResult<Scalar> result;
    IterateSource<Scalar> source = [&]() {
        auto it = seq.next();
        if (it) result.proximity_trace.push_back(it->proximity);
        return it;
    };
    result.output = output_operator(cfg.stop, source);
    result.history = seq.history();
    return result;
}

/// Runs the unsuperiorized algorithm under the same stopping regime.
template <typename Scalar>
RunResult<Scalar> run_plain(const FeasibilityProblem<Scalar>& problem, const AlgorithmicOperator<Scalar>& op,
                            const RunConfig<Scalar>& cfg, StepObserver observer = {}) {
    PlainSequence<Scalar> seq(problem, op, cfg, std::move(observer));
    RunResult<Scalar> result;
    IterateSource<Scalar> source = [&]() {
        auto it = seq.next();
        if (it) result.proximity_trace.push_back(it->proximity);
        return it;
    };
    result.output = output_operator(cfg.stop, source);
    return result;
}

}  // namespace superior
