#include "sbp/cspsolve.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>

#include "sbp/heuristics.hpp"
#include "sbp/lp.hpp"

namespace sbp {

std::string to_string(CspStatus s) {
    switch (s) {
        case CspStatus::Optimal: return "optimal";
        case CspStatus::FeasibleWithGap: return "feasibleWithGap";
        case CspStatus::Infeasible: return "infeasible";
        case CspStatus::TimeLimit: return "timeLimit";
    }
    return "?";
}

namespace {

constexpr double kIntTol = 1e-6;
constexpr double kGapTol = 1e-6;

struct Group {
    std::vector<int> z;
    std::vector<int> machines;
    bool nonempty = false;
};

struct Model {
    std::vector<Group> groups;
    // var v covers (group, pattern)
    std::vector<int> var_group, var_pattern;
    std::vector<std::vector<int>> group_vars;
    std::vector<double> need;  // per service: m_k + total z_k
    lp::LinearProgram base;    // bounds mutated per node
};

bool dominates(const std::vector<int>& p, const std::vector<int>& z) {
    for (std::size_t j = 0; j < z.size(); ++j)
        if (p[j] < z[j]) return false;
    return true;
}

Model build_model(const Instance& inst, const PatternSet& set, CspObjective objective) {
    Model m;
    const int k = inst.service_count();

    std::map<std::vector<int>, int> row_to_group;
    for (int i = 0; i < inst.machine_count(); ++i) {
        auto row = inst.cluster.initial.row(i);
        std::vector<int> key(row.begin(), row.end());
        auto [it, inserted] = row_to_group.try_emplace(key, static_cast<int>(m.groups.size()));
        if (inserted) {
            Group g;
            g.z = key;
            g.nonempty = inst.cluster.initial.row_total(i) > 0;
            m.groups.push_back(std::move(g));
        }
        m.groups[it->second].machines.push_back(i);
    }

    m.group_vars.resize(m.groups.size());
    for (std::size_t g = 0; g < m.groups.size(); ++g) {
        for (int j = 0; j < set.size(); ++j) {
            if (!dominates(set[j].counts, m.groups[g].z)) continue;
            m.group_vars[g].push_back(static_cast<int>(m.var_group.size()));
            m.var_group.push_back(static_cast<int>(g));
            m.var_pattern.push_back(j);
        }
    }

    auto totz = inst.cluster.initial.col_sums();
    m.need.resize(k);
    for (int j = 0; j < k; ++j) m.need[j] = inst.request.demands[j] + totz[j];

    const int nvars = static_cast<int>(m.var_group.size());
    m.base.objective.resize(nvars);
    m.base.lower.assign(nvars, 0.0);
    m.base.upper.resize(nvars);
    for (int v = 0; v < nvars; ++v) {
        m.base.objective[v] =
            objective == CspObjective::Ucac ? set[m.var_pattern[v]].ucac : 1.0;
        m.base.upper[v] = static_cast<double>(m.groups[m.var_group[v]].machines.size());
    }

    // One row per group, then one covering row per service.
    for (std::size_t g = 0; g < m.groups.size(); ++g) {
        lp::Constraint row;
        row.coeffs.assign(nvars, 0.0);
        for (int v : m.group_vars[g]) row.coeffs[v] = 1.0;
        row.rel = m.groups[g].nonempty ? lp::Relation::Equal : lp::Relation::LessEq;
        row.rhs = static_cast<double>(m.groups[g].machines.size());
        m.base.constraints.push_back(std::move(row));
    }
    for (int s = 0; s < k; ++s) {
        lp::Constraint row;
        row.coeffs.assign(nvars, 0.0);
        for (int v = 0; v < nvars; ++v) row.coeffs[v] = static_cast<double>(set[m.var_pattern[v]].counts[s]);
        row.rel = lp::Relation::GreaterEq;
        row.rhs = m.need[s];
        m.base.constraints.push_back(std::move(row));
    }
    return m;
}

// Integer solution in variable space.
struct IntSolution {
    std::vector<int> y;
    double objective = 0.0;
};

bool check_int_solution(const Model& m, const PatternSet& set, const std::vector<int>& y) {
    const int k = static_cast<int>(m.need.size());
    for (std::size_t g = 0; g < m.groups.size(); ++g) {
        long sum = 0;
        for (int v : m.group_vars[g]) sum += y[v];
        long cap = static_cast<long>(m.groups[g].machines.size());
        if (m.groups[g].nonempty ? sum != cap : sum > cap) return false;
    }
    for (int s = 0; s < k; ++s) {
        long covered = 0;
        for (std::size_t v = 0; v < y.size(); ++v)
            covered += static_cast<long>(y[v]) * set[m.var_pattern[v]].counts[s];
        if (covered + 1e-9 < m.need[s]) return false;
    }
    for (std::size_t v = 0; v < y.size(); ++v)
        if (y[v] < 0 || y[v] > static_cast<int>(m.groups[m.var_group[v]].machines.size()))
            return false;
    return true;
}

double int_objective(const Model& m, const std::vector<int>& y) {
    double o = 0.0;
    for (std::size_t v = 0; v < y.size(); ++v) o += m.base.objective[v] * y[v];
    return o;
}

// Converts a feasible placement into assignment counts; returns false when a
// machine's final counts are missing from the pattern set.
bool placement_to_y(const Model& m, const PatternSet& set, const Instance& inst,
                    const Placement& placement, std::vector<int>* out) {
    std::vector<int> y(m.var_group.size(), 0);
    std::map<std::pair<int, int>, int> var_of;  // (group, pattern) -> var
    for (std::size_t v = 0; v < m.var_group.size(); ++v)
        var_of[{m.var_group[v], m.var_pattern[v]}] = static_cast<int>(v);

    std::map<std::vector<int>, int> group_of;
    for (std::size_t g = 0; g < m.groups.size(); ++g) group_of[m.groups[g].z] = static_cast<int>(g);

    const int k = inst.service_count();
    for (int i = 0; i < inst.machine_count(); ++i) {
        std::vector<int> total(k);
        bool any = false;
        for (int j = 0; j < k; ++j) {
            total[j] = inst.cluster.initial(i, j) + placement.alloc(i, j);
            if (total[j] > 0) any = true;
        }
        if (!any) continue;
        int pat = -1;
        for (int j = 0; j < set.size(); ++j)
            if (set[j].counts == total) {
                pat = j;
                break;
            }
        if (pat < 0) return false;
        auto row = inst.cluster.initial.row(i);
        int g = group_of.at(std::vector<int>(row.begin(), row.end()));
        auto it = var_of.find({g, pat});
        if (it == var_of.end()) return false;
        ++y[it->second];
    }
    *out = std::move(y);
    return true;
}

// UCaC-blind starting point for the machine-count objective: each nonempty
// group takes its fullest covering pattern, shortfalls go to empty machines
// with the most helpful pattern.
bool greedy_fill_y(const Model& m, const PatternSet& set, std::vector<int>* out) {
    const int k = static_cast<int>(m.need.size());
    std::vector<int> y(m.var_group.size(), 0);
    std::vector<long> covered(k, 0);

    int empty_group = -1;
    for (std::size_t g = 0; g < m.groups.size(); ++g) {
        if (!m.groups[g].nonempty) {
            empty_group = static_cast<int>(g);
            continue;
        }
        int best_var = -1;
        long best_total = -1;
        for (int v : m.group_vars[g]) {
            long total = 0;
            for (int s = 0; s < k; ++s) total += set[m.var_pattern[v]].counts[s];
            if (total > best_total) {
                best_total = total;
                best_var = v;
            }
        }
        if (best_var < 0) return false;
        int ng = static_cast<int>(m.groups[g].machines.size());
        y[best_var] = ng;
        for (int s = 0; s < k; ++s)
            covered[s] += static_cast<long>(ng) * set[m.var_pattern[best_var]].counts[s];
    }

    auto shortfall = [&](int s) { return std::max(0.0, m.need[s] - covered[s]); };
    bool missing = true;
    int spare = empty_group >= 0 ? static_cast<int>(m.groups[empty_group].machines.size()) : 0;
    while (true) {
        missing = false;
        for (int s = 0; s < k; ++s)
            if (shortfall(s) > 0) missing = true;
        if (!missing) break;
        if (empty_group < 0 || spare == 0) return false;
        int best_var = -1;
        double best_help = 0.0;
        for (int v : m.group_vars[empty_group]) {
            double help = 0.0;
            for (int s = 0; s < k; ++s)
                help += std::min<double>(set[m.var_pattern[v]].counts[s], shortfall(s));
            if (help > best_help) {
                best_help = help;
                best_var = v;
            }
        }
        if (best_var < 0) return false;
        ++y[best_var];
        --spare;
        for (int s = 0; s < k; ++s) covered[s] += set[m.var_pattern[best_var]].counts[s];
    }
    *out = std::move(y);
    return true;
}

struct Node {
    int parent = -1;
    int var = -1;
    double lo = 0.0, hi = 0.0;
    double bound = -std::numeric_limits<double>::infinity();
};

}  // namespace

CspSolution solve_csp(const Instance& inst, const PatternSet& patterns, CspObjective objective,
                      const CspBudget& budget, const Confidence& conf,
                      const Placement* extra_warm) {
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(clock::now() - t0).count(); };

    // Contract: the caller provides coverage (cover_patterns). Checked here.
    for (int i = 0; i < inst.machine_count(); ++i) {
        if (inst.cluster.initial.row_total(i) == 0) continue;
        if (patterns.find_dominating(inst.cluster.initial.row(i)) < 0)
            throw SolveError(SolveError::Kind::InvalidInput,
                             "solve_csp: machine " + std::to_string(i) +
                                 " has no covering pattern");
    }

    CspSolution sol;
    sol.patterns = patterns;

    // Warm-start placements; their per-machine totals become columns.
    std::vector<Placement> warm;
    if (objective == CspObjective::Ucac) {
        try {
            warm.push_back(biheu(inst, HeuristicConfig::defaults(inst, conf)));
        } catch (const SolveError&) {
        }
        if (extra_warm) warm.push_back(*extra_warm);
    } else if (extra_warm) {
        warm.push_back(*extra_warm);
    }
    const int k = inst.service_count();
    for (const auto& w : warm) {
        for (int i = 0; i < inst.machine_count(); ++i) {
            std::vector<int> total(k);
            bool any = false;
            for (int j = 0; j < k; ++j) {
                total[j] = inst.cluster.initial(i, j) + w.alloc(i, j);
                if (total[j] > 0) any = true;
            }
            if (any) sol.patterns.add(make_pattern(std::move(total), inst.services, conf));
        }
    }

    Model model = build_model(inst, sol.patterns, objective);

    // Incumbent.
    IntSolution incumbent;
    bool have_incumbent = false;
    // Returns whether y passed the exact integer checks (not whether it won).
    auto offer = [&](const std::vector<int>& y) {
        if (!check_int_solution(model, sol.patterns, y)) return false;
        double obj = int_objective(model, y);
        if (!have_incumbent || obj < incumbent.objective - 1e-12) {
            incumbent.y = y;
            incumbent.objective = obj;
            have_incumbent = true;
        }
        return true;
    };
    std::vector<int> y0;
    if (objective == CspObjective::MachineCount) {
        if (greedy_fill_y(model, sol.patterns, &y0)) offer(y0);
        if (!have_incumbent) {
            // Fall back to a heuristic placement for feasibility.
            try {
                Placement p = biheu(inst, HeuristicConfig::defaults(inst, conf));
                if (placement_to_y(model, sol.patterns, inst, p, &y0)) offer(y0);
            } catch (const SolveError&) {
            }
        }
    }
    for (const auto& w : warm)
        if (placement_to_y(model, sol.patterns, inst, w, &y0)) offer(y0);

    // Branch and bound, depth-first with periodic best-bound pops.
    std::vector<Node> arena;
    std::vector<int> open;
    arena.push_back(Node{});  // root: no bound override
    open.push_back(0);

    const int nvars = static_cast<int>(model.var_group.size());
    std::vector<double> lo(nvars), hi(nvars);
    std::int64_t pops = 0;
    bool out_of_time = false, out_of_nodes = false;
    double open_lb = -std::numeric_limits<double>::infinity();

    lp::LpOptions lp_opts;

    while (!open.empty()) {
        if (elapsed() > budget.time_limit_sec) {
            out_of_time = true;
            break;
        }
        if (sol.nodes >= budget.node_limit) {
            out_of_nodes = true;
            break;
        }

        // Every 1000th pop takes the best-bound node instead of the deepest.
        std::size_t pick = open.size() - 1;
        if (++pops % 1000 == 0) {
            for (std::size_t i = 0; i < open.size(); ++i)
                if (arena[open[i]].bound < arena[open[pick]].bound) pick = i;
        }
        int node_id = open[pick];
        open.erase(open.begin() + pick);
        ++sol.nodes;

        if (have_incumbent && arena[node_id].bound >= incumbent.objective - 1e-9) continue;

        // Reconstruct bounds along the ancestry.
        for (int v = 0; v < nvars; ++v) {
            lo[v] = 0.0;
            hi[v] = static_cast<double>(model.groups[model.var_group[v]].machines.size());
        }
        for (int cur = node_id; cur >= 0; cur = arena[cur].parent) {
            const Node& nd = arena[cur];
            if (nd.var >= 0) {
                lo[nd.var] = std::max(lo[nd.var], nd.lo);
                hi[nd.var] = std::min(hi[nd.var], nd.hi);
            }
        }

        model.base.lower = lo;
        model.base.upper = hi;
        lp::LpSolution rel = lp::solve_lp(model.base, lp_opts);
        if (rel.status == lp::LpStatus::Infeasible) continue;
        if (rel.status == lp::LpStatus::Unbounded)
            throw SolveError(SolveError::Kind::Internal, "solve_csp: relaxation unbounded");

        double bound = rel.status == lp::LpStatus::Optimal ? rel.objective_value
                                                           : arena[node_id].bound;
        if (have_incumbent) {
            double cutoff = incumbent.objective - 1e-9;
            if (objective == CspObjective::MachineCount)
                cutoff = incumbent.objective - 1.0 + kIntTol;  // integral objective
            if (bound >= cutoff && rel.status == lp::LpStatus::Optimal) continue;
        }

        // Integrality.
        int branch_var = -1;
        double split = 0.0;
        if (rel.status == lp::LpStatus::Optimal) {
            double branch_frac = 2.0;
            for (int v = 0; v < nvars; ++v) {
                double f = rel.primal[v] - std::floor(rel.primal[v]);
                double dist = std::min(f, 1.0 - f);
                if (dist > kIntTol) {
                    double score = std::abs(f - 0.5);  // most fractional first
                    if (score < branch_frac) {
                        branch_frac = score;
                        branch_var = v;
                    }
                }
            }
            if (branch_var < 0) {
                std::vector<int> y(nvars);
                for (int v = 0; v < nvars; ++v) y[v] = static_cast<int>(std::lround(rel.primal[v]));
                if (offer(y)) continue;
                // Rounding missed the exact checks; split on the least
                // integral variable instead of losing the subtree.
                double worst = 0.0;
                for (int v = 0; v < nvars; ++v) {
                    double f = rel.primal[v] - std::floor(rel.primal[v]);
                    double dist = std::min(f, 1.0 - f);
                    if (dist > worst) {
                        worst = dist;
                        branch_var = v;
                    }
                }
                if (branch_var < 0) continue;  // exactly integral yet invalid
            }
            split = rel.primal[branch_var];
        } else {
            // Iteration-limited relaxation: keep the parent bound, split on
            // the first unfixed variable.
            for (int v = 0; v < nvars; ++v)
                if (hi[v] - lo[v] > 0.5) {
                    branch_var = v;
                    break;
                }
            if (branch_var < 0) continue;
            split = 0.5 * (lo[branch_var] + hi[branch_var]);
        }
        double fl = std::floor(split + 1e-12);

        Node down;
        down.parent = node_id;
        down.var = branch_var;
        down.lo = 0.0;
        down.hi = fl;
        down.bound = bound;
        Node up = down;
        up.lo = fl + 1.0;
        up.hi = std::numeric_limits<double>::infinity();
        up.bound = bound;

        if (down.hi >= lo[branch_var] - 0.5) {
            arena.push_back(down);
            open.push_back(static_cast<int>(arena.size()) - 1);
        }
        if (up.lo <= hi[branch_var] + 0.5) {
            arena.push_back(up);
            open.push_back(static_cast<int>(arena.size()) - 1);
        }
    }

    // Global lower bound from whatever remains open.
    open_lb = std::numeric_limits<double>::infinity();
    for (int id : open) open_lb = std::min(open_lb, arena[id].bound);
    if (open.empty()) open_lb = have_incumbent ? incumbent.objective : open_lb;

    if (!have_incumbent) {
        sol.status = (out_of_time || out_of_nodes) ? CspStatus::TimeLimit : CspStatus::Infeasible;
        return sol;
    }

    sol.objective = incumbent.objective;
    sol.lower_bound = std::min(open_lb, incumbent.objective);
    double denom = std::max(std::abs(incumbent.objective), 1e-9);
    sol.gap = std::max(0.0, (incumbent.objective - sol.lower_bound) / denom);
    if (sol.gap <= kGapTol)
        sol.status = CspStatus::Optimal;
    else if (out_of_time)
        sol.status = CspStatus::TimeLimit;
    else
        sol.status = CspStatus::FeasibleWithGap;

    // Expand aggregated counts to per-machine assignments: within a group,
    // ascending machines take ascending pattern ids.
    sol.pattern_of.assign(inst.machine_count(), -1);
    for (std::size_t g = 0; g < model.groups.size(); ++g) {
        std::vector<int> pats;
        for (int v : model.group_vars[g])
            for (int c = 0; c < incumbent.y[v]; ++c) pats.push_back(model.var_pattern[v]);
        std::sort(pats.begin(), pats.end());
        const auto& machines = model.groups[g].machines;
        for (std::size_t idx = 0; idx < pats.size(); ++idx) sol.pattern_of[machines[idx]] = pats[idx];
    }
    return sol;
}

Placement placement_from_patterns(const CspSolution& sol, const Instance& inst,
                                  const Confidence& conf) {
    const int n = inst.machine_count();
    const int k = inst.service_count();
    Placement placement{CountMatrix(n, k)};

    for (int i = 0; i < n; ++i) {
        int pat = i < static_cast<int>(sol.pattern_of.size()) ? sol.pattern_of[i] : -1;
        if (pat < 0) {
            if (inst.cluster.initial.row_total(i) > 0)
                throw SolveError(SolveError::Kind::Internal,
                                 "placement_from_patterns: nonempty machine unassigned");
            continue;
        }
        for (int j = 0; j < k; ++j) {
            int x = sol.patterns[pat].counts[j] - inst.cluster.initial(i, j);
            if (x < 0)
                throw SolveError(SolveError::Kind::Internal,
                                 "placement_from_patterns: cover violated on machine " +
                                     std::to_string(i));
            placement.alloc(i, j) = x;
        }
    }

    // Covering may overshoot the request; trim where removal helps most.
    std::vector<MachineLoad> loads(n);
    for (int i = 0; i < n; ++i) {
        std::vector<int> total(k);
        for (int j = 0; j < k; ++j) total[j] = inst.cluster.initial(i, j) + placement.alloc(i, j);
        loads[i] = machine_load(total, inst.services);
    }
    std::vector<int> sums = placement.alloc.col_sums();
    for (int j = 0; j < k; ++j) {
        int surplus = sums[j] - inst.request.demands[j];
        if (surplus < 0)
            throw SolveError(SolveError::Kind::Internal,
                             "placement_from_patterns: demand uncovered for service " +
                                 std::to_string(j));
        const ServiceSpec& svc = inst.services[j];
        for (int t = 0; t < surplus; ++t) {
            int pick = -1;
            double best_drop = -1.0;
            for (int i = 0; i < n; ++i) {
                if (placement.alloc(i, j) == 0) continue;
                double drop = machine_ucac(loads[i], conf) -
                              machine_ucac(load_add(loads[i], svc, -1), conf);
                if (drop > best_drop) {
                    best_drop = drop;
                    pick = i;
                }
            }
            if (pick < 0)
                throw SolveError(SolveError::Kind::Internal,
                                 "placement_from_patterns: trim failed");
            --placement.alloc(pick, j);
            loads[pick] = load_add(loads[pick], svc, -1);
        }
    }
    return placement;
}

}  // namespace sbp
