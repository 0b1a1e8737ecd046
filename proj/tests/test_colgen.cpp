#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sbp/colgen.hpp"
#include "sbp/lp.hpp"
#include "sbp/rng.hpp"

using namespace sbp;

namespace {
const Confidence kD2{normal_cdf(2.0), 2.0};
}

TEST_CASE("initial_patterns builds the diagonal at per-service max fit") {
    std::vector<ServiceSpec> svcs = {{"a", 2.0, 1.0, 6.0}, {"b", 3.0, 0.0, 4.0}};
    PatternSet set = initial_patterns(svcs, kD2, 10.0);
    REQUIRE(set.size() == 2);
    CHECK(set[0].counts == std::vector<int>{3, 0});
    CHECK(set[1].counts == std::vector<int>{0, 3});
    CHECK(set[0].ucac == doctest::Approx(6.0 + 2.0 * std::sqrt(3.0)));

    std::vector<ServiceSpec> exact = {{"a", 10.0, 0.0, 11.0}};
    PatternSet one = initial_patterns(exact, kD2, 10.0);
    CHECK(one[0].counts == std::vector<int>{1});

    std::vector<ServiceSpec> toobig = {{"a", 11.0, 0.0, 12.0}};
    CHECK_THROWS_AS(initial_patterns(toobig, kD2, 10.0), SolveError);
}

TEST_CASE("price_pattern on zero duals returns the zero pattern at cost 1") {
    std::vector<ServiceSpec> svcs = {{"a", 2.0, 1.0, 6.0}};
    std::vector<double> duals = {0.0};
    PricedPattern priced = price_pattern(duals, svcs, kD2, 10.0);
    CHECK(priced.pattern.counts == std::vector<int>{0});
    CHECK(priced.reduced_cost == doctest::Approx(1.0));
}

TEST_CASE("price_pattern finds the deterministic two-service optimum") {
    std::vector<ServiceSpec> svcs = {{"a", 5.0, 0.0, 6.0}, {"b", 4.0, 0.0, 5.0}};
    std::vector<double> duals = {0.5, 0.5};
    PricedPattern priced = price_pattern(duals, svcs, kD2, 10.0);
    // (2,0) and (1,1) both reach dual value 1.0
    double value = 0.5 * priced.pattern.counts[0] + 0.5 * priced.pattern.counts[1];
    CHECK(value == doctest::Approx(1.0));
    CHECK(priced.reduced_cost == doctest::Approx(0.0));
}

TEST_CASE("price_pattern single stochastic service") {
    std::vector<ServiceSpec> svcs = {{"a", 2.0, 1.0, 6.0}};
    std::vector<double> duals = {0.4};
    PricedPattern priced = price_pattern(duals, svcs, kD2, 10.0);
    CHECK(priced.pattern.counts == std::vector<int>{3});
    CHECK(priced.reduced_cost == doctest::Approx(1.0 - 1.2));
}

TEST_CASE("price_pattern matches exhaustive enumeration on random instances") {
    Rng rng(41);
    for (int t = 0; t < 60; ++t) {
        int k = 1 + rng.uniform_int(3);
        std::vector<ServiceSpec> svcs;
        for (int j = 0; j < k; ++j) {
            double mean = rng.uniform(1.0, 4.0);
            svcs.push_back({"s" + std::to_string(j), mean, rng.uniform(0.0, 2.0), mean + 9.0});
        }
        double cap = rng.uniform(6.0, 12.0);
        std::vector<double> duals(k);
        for (int j = 0; j < k; ++j) duals[j] = rng.uniform(0.0, 1.0);

        PricedPattern priced = price_pattern(duals, svcs, kD2, cap);
        auto all = enumerate_feasible_patterns(svcs, kD2, cap, 100000);
        REQUIRE(all.has_value());
        double best = 0.0;  // zero pattern
        for (const auto& p : *all) {
            double v = 0.0;
            for (int j = 0; j < k; ++j) v += duals[j] * p.counts[j];
            best = std::max(best, v);
        }
        CHECK(1.0 - best == doctest::Approx(priced.reduced_cost).epsilon(1e-9));
    }
}

TEST_CASE("generate_patterns: single service converges immediately") {
    std::vector<ServiceSpec> svcs = {{"a", 2.0, 1.0, 6.0}};
    std::vector<int> demands = {10};
    ColgenResult res = generate_patterns(svcs, kD2, 10.0, demands);
    CHECK(res.set.size() == 1);
    CHECK(res.columns_added == 0);
    CHECK_FALSE(res.hit_column_cap);
}

TEST_CASE("generate_patterns terminates with no pattern below -tol") {
    // The deterministic two-service case: diagonal duals leave every mixed
    // pattern at reduced cost exactly 0, so nothing further is generated.
    std::vector<ServiceSpec> svcs = {{"a", 5.0, 0.0, 6.0}, {"b", 4.0, 0.0, 5.0}};
    std::vector<int> demands = {10, 10};
    ColgenResult res = generate_patterns(svcs, kD2, 10.0, demands);
    CHECK(res.final_rmp_objective == doctest::Approx(10.0));

    // Exit certificate against the full enumeration. Duals of the final RMP
    // are recoverable by one more pricing round.
    PricedPattern final_price =
        price_pattern(std::vector<double>{0.5, 0.5}, svcs, kD2, 10.0);
    CHECK(final_price.reduced_cost >= -1e-6);
}

TEST_CASE("generate_patterns certificate on random stochastic instances") {
    Rng rng(43);
    for (int t = 0; t < 25; ++t) {
        int k = 1 + rng.uniform_int(3);
        std::vector<ServiceSpec> svcs;
        std::vector<int> demands(k);
        for (int j = 0; j < k; ++j) {
            double mean = rng.uniform(1.5, 4.0);
            svcs.push_back({"s" + std::to_string(j), mean, rng.uniform(0.0, 2.0), mean + 9.0});
            demands[j] = 1 + rng.uniform_int(20);
        }
        double cap = rng.uniform(6.0, 11.0);
        ColgenResult res = generate_patterns(svcs, kD2, cap, demands);
        REQUIRE_FALSE(res.hit_column_cap);

        // Every emitted pattern satisfies the capacity constraint.
        for (const auto& p : res.set.patterns()) {
            MachineLoad load = machine_load(p.counts, svcs);
            CHECK(machine_ucac(load, kD2) <= cap + kFeasTol);
        }

        // Exhaustive termination certificate on the final duals.
        auto all = enumerate_feasible_patterns(svcs, kD2, cap, 200000);
        REQUIRE(all.has_value());

        // Rebuild final duals by re-solving the RMP over the emitted set.
        lp::LinearProgram prog;
        prog.objective.assign(res.set.size(), 1.0);
        for (int r = 0; r < k; ++r) {
            lp::Constraint row;
            row.coeffs.resize(res.set.size());
            for (int c = 0; c < res.set.size(); ++c) row.coeffs[c] = res.set[c].counts[r];
            row.rel = lp::Relation::GreaterEq;
            row.rhs = demands[r];
            prog.constraints.push_back(std::move(row));
        }
        lp::LpSolution rmp = lp::solve_lp(prog);
        REQUIRE(rmp.status == lp::LpStatus::Optimal);

        double min_rc = 1.0;
        for (const auto& p : *all) {
            double v = 0.0;
            for (int j = 0; j < k; ++j) v += std::max(rmp.dual[j], 0.0) * p.counts[j];
            min_rc = std::min(min_rc, 1.0 - v);
        }
        CHECK(min_rc >= -1e-6);

        // RMP objective never increases as columns are added (spot check:
        // final objective <= objective of the diagonal-only RMP).
        PatternSet diag = initial_patterns(svcs, kD2, cap);
        lp::LinearProgram prog0;
        prog0.objective.assign(diag.size(), 1.0);
        for (int r = 0; r < k; ++r) {
            lp::Constraint row;
            row.coeffs.resize(diag.size());
            for (int c = 0; c < diag.size(); ++c) row.coeffs[c] = diag[c].counts[r];
            row.rel = lp::Relation::GreaterEq;
            row.rhs = demands[r];
            prog0.constraints.push_back(std::move(row));
        }
        lp::LpSolution rmp0 = lp::solve_lp(prog0);
        CHECK(rmp.objective_value <= rmp0.objective_value + 1e-9);
    }
}

TEST_CASE("cover_patterns adds machine rows and their maximal extensions") {
    std::vector<ServiceSpec> svcs = {{"a", 2.0, 1.0, 6.0}, {"b", 3.0, 0.0, 4.0}};
    PatternSet set = initial_patterns(svcs, kD2, 10.0);  // (3,0), (0,3)

    ClusterState cluster;
    cluster.capacity = 10.0;
    cluster.initial = CountMatrix(2, 2);
    cluster.initial(0, 0) = 1;
    cluster.initial(0, 1) = 1;  // (1,1) dominated by nothing in the set

    PatternSet covered = cover_patterns(set, cluster, svcs, kD2);
    CHECK(covered.size() >= 3);
    CHECK(covered.contains({1, 1}));
    CHECK(covered.find_dominating(cluster.initial.row(0)) >= 0);
    // The maximal extension still dominates the row.
    bool has_extension = false;
    for (const auto& p : covered.patterns())
        if (p.counts[0] >= 1 && p.counts[1] >= 1 && p.counts != std::vector<int>{1, 1})
            has_extension = true;
    CHECK(has_extension);

    // Idempotent once covered; empty clusters change nothing.
    PatternSet again = cover_patterns(covered, cluster, svcs, kD2);
    CHECK(again.size() == covered.size());

    ClusterState empty;
    empty.capacity = 10.0;
    empty.initial = CountMatrix(3, 2);
    CHECK(cover_patterns(set, empty, svcs, kD2).size() == set.size());
}

TEST_CASE("enumerate_feasible_patterns counts the single-service case") {
    std::vector<ServiceSpec> svcs = {{"a", 2.0, 1.0, 6.0}};
    auto all = enumerate_feasible_patterns(svcs, kD2, 10.0, 100);
    REQUIRE(all.has_value());
    CHECK(all->size() == 3);  // (1), (2), (3)

    auto limited = enumerate_feasible_patterns(svcs, kD2, 10.0, 2);
    CHECK_FALSE(limited.has_value());
}

TEST_CASE("pattern set deduplicates by exact counts") {
    std::vector<ServiceSpec> svcs = {{"a", 2.0, 1.0, 6.0}};
    PatternSet set;
    CHECK(set.add(make_pattern({2}, svcs, kD2)));
    CHECK_FALSE(set.add(make_pattern({2}, svcs, kD2)));
    CHECK(set.size() == 1);
}
