#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "superior/engine.hpp"
#include "test_support.hpp"

using namespace superior;
using namespace superior::testing;

namespace {

FeasibilityProblem<double> interval_problem() {
    std::vector<ConvexSet<double>> sets{Box<double>(vec({1.0}), vec({2.0}))};
    return FeasibilityProblem<double>(std::move(sets));
}

RunConfig<double> config(Vec start, std::shared_ptr<const ConvexObjective<double>> phi, double eps = 1e-9,
                         std::size_t budget = 10000) {
    RunConfig<double> cfg;
    cfg.initial_point = std::move(start);
    cfg.objective = std::move(phi);
    cfg.stop = {eps, budget};
    return cfg;
}

// ||x||^2 paired with a subgradient pointing uphill, so every trial fails the phi test.
class Adversarial final : public ConvexObjective<double> {
public:
    double value(const Point<double>& x) const override { return x.squaredNorm(); }
    Point<double> subgradient(const Point<double>& x) const override { return -Point<double>::Ones(x.size()); }
};

}  // namespace

TEST_CASE("one-dimensional box example") {
    const auto p = interval_problem();
    const SapOperator<double> op(p, Amalgamator::sequential(1));
    SuperiorizationState<double> s{0, 0, vec({3.0}), proximity(p, vec({3.0}))};
    CHECK(s.proximity == 1.0);
    StepRecord rec;
    const auto next = superiorized_step(s, op, p, SquaredNorm<double>(), GammaSequence::geometric(0.5), 10, &rec);
    CHECK(next.x == vec({2.0}));
    CHECK(next.k == 1);
    CHECK(next.ell == 1);
    CHECK(next.proximity == 0.0);
    CHECK(rec.beta == 1.0);
    CHECK(rec.direction_norm == 1.0);
    CHECK(rec.objective_x == 9.0);
    CHECK(rec.objective_y == 4.0);
    CHECK(rec.trials == 1);
}

TEST_CASE("a failed phi test shrinks beta within the iteration") {
    // phi(x) = x^2 at x = 0.3 with gamma_0 = 1: y = -0.7 fails, gamma_1 = 0.5 gives y = -0.2.
    std::vector<ConvexSet<double>> sets{Box<double>(vec({-5.0}), vec({-1.0}))};
    const FeasibilityProblem<double> p(std::move(sets));
    const SapOperator<double> op(p, Amalgamator::sequential(1));
    SuperiorizationState<double> s{0, 0, vec({0.3}), proximity(p, vec({0.3}))};
    StepRecord rec;
    const auto next = superiorized_step(s, op, p, SquaredNorm<double>(), GammaSequence::geometric(0.5), 10, &rec);
    CHECK(rec.trials == 2);
    CHECK(rec.ell == 1);
    CHECK(rec.beta == 0.5);
    CHECK(next.ell == 2);
    CHECK(next.x == vec({-1.0}));
}

TEST_CASE("zero objective reproduces the plain run") {
    Rng rng(7);
    const auto sys = random_hyperplane_system(rng, 12, 20);
    const Vec start = random_point(rng, 12, 4.0);
    const SapOperator<double> art(sys.problem, Amalgamator::sequential(20));
    const BipOperator<double> bip(sys.problem, BlockScheme::contiguous(20, 5));
    for (const AlgorithmicOperator<double>* op : {static_cast<const AlgorithmicOperator<double>*>(&art),
                                                   static_cast<const AlgorithmicOperator<double>*>(&bip)}) {
        auto cfg = config(start, std::make_shared<ZeroObjective<double>>());
        SuperiorizedSequence<double> sup(sys.problem, *op, cfg);
        PlainSequence<double> plain(sys.problem, *op, cfg);
        for (int k = 0; k <= 60; ++k) {
            const auto a = sup.next();
            const auto b = plain.next();
            if (!a) break;  // superiorized stream ends at an exact solution
            REQUIRE(b);
            CHECK(a->k == b->k);
            CHECK((a->x - b->x).cwiseAbs().maxCoeff() <= 1e-12);
        }
    }
}

TEST_CASE("history invariants on a random instance") {
    Rng rng(9);
    const auto sys = random_hyperplane_system(rng, 16, 12);
    const BipOperator<double> bip(sys.problem, BlockScheme::contiguous(12, 3));
    auto cfg = config(random_point(rng, 16, 3.0), std::make_shared<SquaredNorm<double>>(), 1e-4);
    cfg.gamma = GammaSequence::geometric(0.99);
    cfg.record_history = true;
    cfg.inner_budget = 100000;
    const auto r = run_superiorized(sys.problem, bip, cfg);
    REQUIRE(r.defined());
    REQUIRE(!r.history.empty());
    std::size_t prev_end = 0;
    for (std::size_t i = 0; i < r.history.size(); ++i) {
        const auto& h = r.history[i];
        CHECK(h.k == i);
        CHECK(h.ell + 1 - h.trials == prev_end);  // trials pick up exactly where the last step stopped
        prev_end = h.ell + 1;
        CHECK(h.beta == cfg.gamma(h.ell));
        CHECK((h.direction_norm == 0.0 || h.direction_norm == 1.0));
        CHECK(h.objective_y <= h.objective_x);
        CHECK(h.proximity_next < h.proximity_x);
        CHECK(h.proximity_next == r.proximity_trace[i + 1]);
    }
}

TEST_CASE("stall is reported with the iteration and gamma index") {
    const auto p = interval_problem();
    const SapOperator<double> op(p, Amalgamator::sequential(1));
    SuperiorizationState<double> s{4, 17, vec({3.0}), 1.0};
    try {
        superiorized_step(s, op, p, Adversarial(), GammaSequence::geometric(0.5), 25);
        FAIL("expected InnerStall");
    } catch (const InnerStall& e) {
        CHECK(e.iteration == 4);
        CHECK(e.gamma_index == 42);
    }
}

TEST_CASE("run_superiorized edge cases") {
    const auto axes = axes_problem();
    const SapOperator<double> sweep(axes, Amalgamator::sequential(2));

    auto cfg = config(vec({3, 4}), std::make_shared<SquaredNorm<double>>(), 10.0);
    auto r = run_superiorized(axes, sweep, cfg);
    REQUIRE(r.defined());
    CHECK(r.iterations() == 0);
    CHECK(r.proximity_trace.size() == 1);
    CHECK(r.output.output->x == vec({3, 4}));

    // A solution start ends the stream right after x-bar.
    cfg = config(vec({0, 0}), std::make_shared<SquaredNorm<double>>(), 1e-3);
    SuperiorizedSequence<double> seq(axes, sweep, cfg);
    CHECK(seq.next().has_value());
    CHECK_FALSE(seq.next().has_value());

    cfg.objective.reset();
    CHECK_THROWS_AS(SuperiorizedSequence<double>(axes, sweep, cfg), std::invalid_argument);
    cfg = config(vec({1, 2, 3}), std::make_shared<ZeroObjective<double>>());
    CHECK_THROWS_AS(run_superiorized(axes, sweep, cfg), DimensionMismatch);
}

TEST_CASE("run_plain examples") {
    const auto axes = axes_problem();
    const SapOperator<double> sweep(axes, Amalgamator::sequential(2));
    auto r = run_plain(axes, sweep, config(vec({3, 4}), nullptr, 1e-9));
    REQUIRE(r.defined());
    CHECK(r.iterations() == 1);
    CHECK(r.proximity_trace == std::vector<double>{5.0, 0.0});
    CHECK(r.output.output->x == vec({0, 0}));

    // Feasible start: constant sequence.
    PlainSequence<double> seq(axes, sweep, config(vec({0, 0}), nullptr));
    for (int k = 0; k < 5; ++k) CHECK(seq.next()->x == vec({0, 0}));
}

TEST_CASE("superiorized run reaches eps whenever the plain run does") {
    Rng rng(13);
    for (int trial = 0; trial < 10; ++trial) {
        const auto sys = random_hyperplane_system(rng, 10, 14);
        const Vec start = random_point(rng, 10, 3.0);
        const SapOperator<double> art(sys.problem, Amalgamator::sequential(14));
        auto cfg = config(start, std::make_shared<SquaredNorm<double>>(), 1e-4, 20000);
        cfg.inner_budget = 100000;
        const auto plain = run_plain(sys.problem, art, cfg);
        REQUIRE(plain.defined());
        for (std::size_t k = 1; k <= plain.iterations(); ++k)
            CHECK(plain.proximity_trace[k] < plain.proximity_trace[k - 1]);
        const auto sup = run_superiorized(sys.problem, art, cfg);
        REQUIRE(sup.defined());
        CHECK(sup.output.output->proximity <= 1e-4);
    }
}

TEST_CASE("gamma sequences") {
    const auto g = GammaSequence::geometric(0.999);
    CHECK(g(0) == 1.0);
    CHECK(g(1) == 0.999);
    CHECK(g(1000) == doctest::Approx(std::pow(0.999, 1000)));
    CHECK(g.total() == doctest::Approx(1000.0));

    const auto t = GammaSequence::table({4, 2, 1}, 0.25);
    CHECK(t(1) == 2.0);
    CHECK(t(3) == 0.25);
    CHECK(t(4) == 0.0625);
    CHECK(t.total() == doctest::Approx(7.0 + 1.0 / 3.0));

    CHECK_THROWS_AS(GammaSequence::geometric(1.0), std::invalid_argument);
    CHECK_THROWS_AS(GammaSequence::table({1, -1}, 0.5), std::invalid_argument);
}
