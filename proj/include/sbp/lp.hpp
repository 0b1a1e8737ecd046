#pragma once

#include <cstdint>
#include <limits>
#include <vector>

namespace sbp::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Relation { LessEq, GreaterEq, Equal };

struct Constraint {
    std::vector<double> coeffs;
    Relation rel = Relation::LessEq;
    double rhs = 0.0;
};

// Minimization problem over bounded variables. Bounds default to [0, +inf).
struct LinearProgram {
    std::vector<double> objective;
    std::vector<Constraint> constraints;
    std::vector<double> lower;  // empty -> all 0
    std::vector<double> upper;  // empty -> all +inf

    int num_vars() const { return static_cast<int>(objective.size()); }
    int num_rows() const { return static_cast<int>(constraints.size()); }
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    std::vector<double> primal;
    std::vector<double> dual;  // one multiplier per constraint row
    double objective_value = 0.0;
    int iterations = 0;
    int iteration_limit = 0;
};

struct LpOptions {
    int max_iterations = 0;      // 0 -> derived from problem size
    int bland_stall_limit = 50;  // degenerate pivots before Bland's rule kicks in
    int refactor_every = 300;
};

// Two-phase bounded-variable revised simplex with a dense explicit inverse.
// Dantzig pricing, Bland's rule after a degenerate stall.
LpSolution solve_lp(const LinearProgram& lp, const LpOptions& opts = {});

}  // namespace sbp::lp
