#pragma once

#include <cstdint>
#include <limits>

#include "sbp/colgen.hpp"
#include "sbp/gauss.hpp"
#include "sbp/model.hpp"

namespace sbp {

enum class CspObjective { Ucac, MachineCount };

struct CspBudget {
    double time_limit_sec = 60.0;
    std::int64_t node_limit = 1'000'000;
};

enum class CspStatus { Optimal, FeasibleWithGap, Infeasible, TimeLimit };

std::string to_string(CspStatus s);

struct CspSolution {
    CspStatus status = CspStatus::Infeasible;
    std::vector<int> pattern_of;  // per machine; -1 = no pattern assigned
    double objective = 0.0;
    double lower_bound = 0.0;
    double gap = std::numeric_limits<double>::infinity();
    std::int64_t nodes = 0;
    PatternSet patterns;  // working set: input plus warm-start columns
};

// Generalized cutting-stock solve: every nonempty machine takes exactly one
// componentwise-dominating pattern, empty machines at most one, pattern
// totals cover request + existing containers. Machines with identical
// initial rows are interchangeable, so assignment variables are aggregated
// per (distinct row, pattern) and branch-and-bound runs on those integer
// counts with LP-relaxation bounds.
//
// The incumbent is warm-started from the bi-level heuristic for the UCaC
// objective (plus `extra_warm` when given); the machine-count objective
// starts from a fill-greedy solution instead so the baseline stays blind to
// UCaC. Throws when a nonempty machine has no covering pattern.
CspSolution solve_csp(const Instance& inst, const PatternSet& patterns, CspObjective objective,
                      const CspBudget& budget, const Confidence& conf,
                      const Placement* extra_warm = nullptr);

// x_i = p_j - z_i for the assigned pattern, zero rows elsewhere; surplus over
// the request is trimmed from the machines where removal lowers cluster UCaC
// the most.
Placement placement_from_patterns(const CspSolution& sol, const Instance& inst,
                                  const Confidence& conf);

}  // namespace sbp
