#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "sbp/lp.hpp"
#include "sbp/rng.hpp"

using namespace sbp;
using namespace sbp::lp;

namespace {

Constraint row(std::vector<double> c, Relation r, double b) { return {std::move(c), r, b}; }

// Full optimality certificate: primal feasibility, dual feasibility via
// reduced costs against variable states, and complementary slackness.
void check_certificate(const LinearProgram& p, const LpSolution& s) {
    REQUIRE(s.status == LpStatus::Optimal);
    const int n = p.num_vars();
    const int m = p.num_rows();

    for (int j = 0; j < n; ++j) {
        double lo = p.lower.empty() ? 0.0 : p.lower[j];
        double up = p.upper.empty() ? kInf : p.upper[j];
        CHECK(s.primal[j] >= lo - 1e-7);
        CHECK(s.primal[j] <= up + 1e-7);
    }

    double dual_obj = 0.0;
    for (int i = 0; i < m; ++i) {
        double lhs = 0.0;
        for (int j = 0; j < n; ++j) lhs += p.constraints[i].coeffs[j] * s.primal[j];
        double rhs = p.constraints[i].rhs;
        switch (p.constraints[i].rel) {
            case Relation::LessEq:
                CHECK(lhs <= rhs + 1e-7);
                CHECK(s.dual[i] <= 1e-7);  // min problem: <= rows price non-positive
                break;
            case Relation::GreaterEq:
                CHECK(lhs >= rhs - 1e-7);
                CHECK(s.dual[i] >= -1e-7);
                break;
            case Relation::Equal:
                CHECK(std::abs(lhs - rhs) <= 1e-7);
                break;
        }
        // Complementary slackness on rows.
        CHECK(std::abs(s.dual[i] * (lhs - rhs)) <= 1e-6);
        dual_obj += s.dual[i] * rhs;
    }

    // Reduced costs: d_j >= 0 at lower bound, <= 0 at upper bound; bound
    // terms complete the dual objective.
    for (int j = 0; j < n; ++j) {
        double d = p.objective[j];
        for (int i = 0; i < m; ++i) d -= s.dual[i] * p.constraints[i].coeffs[j];
        double lo = p.lower.empty() ? 0.0 : p.lower[j];
        double up = p.upper.empty() ? kInf : p.upper[j];
        bool at_lo = s.primal[j] <= lo + 1e-6;
        bool at_up = std::isfinite(up) && s.primal[j] >= up - 1e-6;
        if (!at_lo && !at_up) CHECK(std::abs(d) <= 1e-6);  // basic
        if (at_lo && !at_up) CHECK(d >= -1e-6);
        if (at_up && !at_lo) CHECK(d <= 1e-6);
        if (d > 0)
            dual_obj += d * lo;
        else if (std::isfinite(up))
            dual_obj += d * up;
    }
    CHECK(std::abs(dual_obj - s.objective_value) <= 1e-6 * (1.0 + std::abs(s.objective_value)));
}

}  // namespace

TEST_CASE("separable LP with exact duals") {
    LinearProgram p;
    p.objective = {1.0, 1.0};
    p.constraints = {row({2.0, 0.0}, Relation::GreaterEq, 4.0),
                     row({0.0, 3.0}, Relation::GreaterEq, 3.0)};
    LpSolution s = solve_lp(p);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.primal[0] == doctest::Approx(2.0));
    CHECK(s.primal[1] == doctest::Approx(1.0));
    CHECK(s.objective_value == doctest::Approx(3.0));
    CHECK(s.dual[0] == doctest::Approx(0.5));
    CHECK(s.dual[1] == doctest::Approx(1.0 / 3.0));
    check_certificate(p, s);
}

TEST_CASE("diagonal restricted master has closed-form primal and duals") {
    // Columns p_kk with demands m_k: v_k = m_k / p_kk, duals 1/p_kk.
    const double diag[] = {3.0, 5.0, 2.0};
    const double demand[] = {7.0, 11.0, 4.0};
    LinearProgram p;
    p.objective = {1.0, 1.0, 1.0};
    for (int r = 0; r < 3; ++r) {
        std::vector<double> c(3, 0.0);
        c[r] = diag[r];
        p.constraints.push_back(row(std::move(c), Relation::GreaterEq, demand[r]));
    }
    LpSolution s = solve_lp(p);
    REQUIRE(s.status == LpStatus::Optimal);
    for (int r = 0; r < 3; ++r) {
        CHECK(s.primal[r] == doctest::Approx(demand[r] / diag[r]));
        CHECK(s.dual[r] == doctest::Approx(1.0 / diag[r]));
    }
    check_certificate(p, s);
}

TEST_CASE("infeasible and unbounded detection") {
    LinearProgram inf;
    inf.objective = {1.0};
    inf.constraints = {row({0.0}, Relation::GreaterEq, 1.0)};
    CHECK(solve_lp(inf).status == LpStatus::Infeasible);

    LinearProgram unb;
    unb.objective = {-1.0};
    unb.constraints = {row({0.0}, Relation::LessEq, 1.0)};
    CHECK(solve_lp(unb).status == LpStatus::Unbounded);

    LinearProgram conflict;
    conflict.objective = {1.0};
    conflict.constraints = {row({1.0}, Relation::GreaterEq, 5.0),
                            row({1.0}, Relation::LessEq, 3.0)};
    CHECK(solve_lp(conflict).status == LpStatus::Infeasible);
}

TEST_CASE("upper-bounded variables and a slack basic optimum") {
    LinearProgram p;
    p.objective = {-1.0, -1.0};
    p.constraints = {row({1.0, 1.0}, Relation::LessEq, 10.0)};
    p.lower = {0.0, 0.0};
    p.upper = {3.0, 4.0};
    LpSolution s = solve_lp(p);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.primal[0] == doctest::Approx(3.0));
    CHECK(s.primal[1] == doctest::Approx(4.0));
    CHECK(s.objective_value == doctest::Approx(-7.0));
    check_certificate(p, s);
}

TEST_CASE("equality rows") {
    LinearProgram p;
    p.objective = {2.0, 3.0};
    p.constraints = {row({1.0, 1.0}, Relation::Equal, 4.0),
                     row({1.0, -1.0}, Relation::LessEq, 2.0)};
    LpSolution s = solve_lp(p);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.objective_value == doctest::Approx(9.0));  // x = (3,1)
    check_certificate(p, s);
}

TEST_CASE("Beale's cycling example terminates at the optimum") {
    LinearProgram p;
    p.objective = {-0.75, 150.0, -0.02, 6.0};
    p.constraints = {row({0.25, -60.0, -1.0 / 25.0, 9.0}, Relation::LessEq, 0.0),
                     row({0.5, -90.0, -1.0 / 50.0, 3.0}, Relation::LessEq, 0.0),
                     row({0.0, 0.0, 1.0, 0.0}, Relation::LessEq, 1.0)};
    LpSolution s = solve_lp(p);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.objective_value == doctest::Approx(-0.05).epsilon(1e-9));
    check_certificate(p, s);
}

TEST_CASE("no-row programs pick the cheaper bound") {
    LinearProgram p;
    p.objective = {1.0, -2.0};
    p.lower = {1.0, 0.0};
    p.upper = {kInf, 5.0};
    LpSolution s = solve_lp(p);
    REQUIRE(s.status == LpStatus::Optimal);
    CHECK(s.primal[0] == 1.0);
    CHECK(s.primal[1] == 5.0);
}

TEST_CASE("random LPs satisfy the optimality certificate") {
    Rng rng(2024);
    int optimal = 0;
    for (int t = 0; t < 150; ++t) {
        int n = 2 + rng.uniform_int(6);
        int m = 1 + rng.uniform_int(5);
        LinearProgram p;
        p.objective.resize(n);
        p.lower.assign(n, 0.0);
        p.upper.assign(n, kInf);
        for (int j = 0; j < n; ++j) {
            p.objective[j] = rng.uniform(-3.0, 5.0);
            if (rng.uniform01() < 0.4) p.upper[j] = rng.uniform(0.5, 8.0);
        }
        // Feasible by construction: rhs from a random reference point.
        std::vector<double> ref(n);
        for (int j = 0; j < n; ++j)
            ref[j] = rng.uniform(0.0, std::isfinite(p.upper[j]) ? p.upper[j] : 4.0);
        for (int i = 0; i < m; ++i) {
            std::vector<double> c(n);
            double lhs = 0.0;
            for (int j = 0; j < n; ++j) {
                c[j] = rng.uniform(-2.0, 4.0);
                lhs += c[j] * ref[j];
            }
            double roll = rng.uniform01();
            if (roll < 0.4) p.constraints.push_back(row(std::move(c), Relation::LessEq, lhs + rng.uniform(0.0, 2.0)));
            else if (roll < 0.8) p.constraints.push_back(row(std::move(c), Relation::GreaterEq, lhs - rng.uniform(0.0, 2.0)));
            else p.constraints.push_back(row(std::move(c), Relation::Equal, lhs));
        }
        LpSolution s = solve_lp(p);
        REQUIRE(s.status != LpStatus::Infeasible);  // reference point is feasible
        if (s.status == LpStatus::Optimal) {
            ++optimal;
            check_certificate(p, s);
        }
    }
    CHECK(optimal > 50);  // most random instances are bounded
}

TEST_CASE("larger LPs with frequent refactorization stay consistent") {
    Rng rng(555);
    LpOptions opts;
    opts.refactor_every = 25;  // exercise the inverse rebuild
    for (int t = 0; t < 10; ++t) {
        int n = 40 + rng.uniform_int(40);
        int m = 15 + rng.uniform_int(15);
        LinearProgram p;
        p.objective.resize(n);
        p.lower.assign(n, 0.0);
        p.upper.assign(n, kInf);
        std::vector<double> ref(n);
        for (int j = 0; j < n; ++j) {
            p.objective[j] = rng.uniform(-2.0, 4.0);
            if (rng.uniform01() < 0.3) p.upper[j] = rng.uniform(1.0, 6.0);
            ref[j] = rng.uniform(0.0, std::isfinite(p.upper[j]) ? p.upper[j] : 3.0);
        }
        for (int i = 0; i < m; ++i) {
            std::vector<double> c(n, 0.0);
            double lhs = 0.0;
            for (int j = 0; j < n; ++j) {
                if (rng.uniform01() < 0.3) c[j] = rng.uniform(-2.0, 4.0);
                lhs += c[j] * ref[j];
            }
            double roll = rng.uniform01();
            if (roll < 0.45)
                p.constraints.push_back(row(std::move(c), Relation::LessEq, lhs + rng.uniform(0.0, 2.0)));
            else if (roll < 0.9)
                p.constraints.push_back(row(std::move(c), Relation::GreaterEq, lhs - rng.uniform(0.0, 2.0)));
            else
                p.constraints.push_back(row(std::move(c), Relation::Equal, lhs));
        }
        LpSolution s = solve_lp(p, opts);
        REQUIRE(s.status != LpStatus::Infeasible);
        if (s.status == LpStatus::Optimal) {
            check_certificate(p, s);
            // The default pivot cadence must land on the same optimum.
            LpSolution d = solve_lp(p);
            if (d.status == LpStatus::Optimal)
                CHECK(s.objective_value == doctest::Approx(d.objective_value).epsilon(1e-7));
        }
    }
}

TEST_CASE("deterministic: same LP solves to the same basis twice") {
    LinearProgram p;
    p.objective = {1.0, 2.0, -1.0};
    p.constraints = {row({1.0, 1.0, 1.0}, Relation::LessEq, 7.0),
                     row({2.0, 0.0, 1.0}, Relation::GreaterEq, 3.0)};
    p.upper = {5.0, 5.0, 5.0};
    p.lower = {0.0, 0.0, 0.0};
    LpSolution a = solve_lp(p);
    LpSolution b = solve_lp(p);
    CHECK(a.primal == b.primal);
    CHECK(a.dual == b.dual);
    CHECK(a.iterations == b.iterations);
}
