#include "sbp/colgen.hpp"

#include <algorithm>
#include <cmath>

#include "sbp/heuristics.hpp"
#include "sbp/lp.hpp"

namespace sbp {

Pattern make_pattern(std::vector<int> counts, std::span<const ServiceSpec> services,
                     const Confidence& conf) {
    Pattern p;
    p.ucac = machine_ucac(machine_load(counts, services), conf);
    p.counts = std::move(counts);
    return p;
}

bool PatternSet::add(Pattern p) {
    if (contains(p.counts)) return false;
    patterns_.push_back(std::move(p));
    return true;
}

bool PatternSet::contains(const std::vector<int>& counts) const {
    for (const auto& p : patterns_)
        if (p.counts == counts) return true;
    return false;
}

int PatternSet::find_dominating(std::span<const int> counts) const {
    for (int idx = 0; idx < size(); ++idx) {
        const auto& p = patterns_[idx].counts;
        bool dominates = true;
        for (std::size_t j = 0; j < counts.size(); ++j)
            if (p[j] < counts[j]) {
                dominates = false;
                break;
            }
        if (dominates) return idx;
    }
    return -1;
}

PatternSet initial_patterns(std::span<const ServiceSpec> services, const Confidence& conf,
                            double capacity) {
    PatternSet set;
    const int k = static_cast<int>(services.size());
    for (int j = 0; j < k; ++j) {
        int fit = max_fit_count(services[j], MachineLoad{}, conf, capacity);
        if (fit < 1)
            throw SolveError(SolveError::Kind::CapacityExhausted,
                             "initial_patterns: service " + services[j].id +
                                 " does not fit an empty machine");
        std::vector<int> counts(k, 0);
        counts[j] = fit;
        set.add(make_pattern(std::move(counts), services, conf));
    }
    return set;
}

namespace {

// Depth-first exact search for the pattern maximizing duals^T p subject to
// the chance-constraint capacity. Services are visited in non-increasing
// dual/mean order; the bound adds each remaining service's solo max fit.
class PricingSearch {
public:
    PricingSearch(std::span<const double> duals, std::span<const ServiceSpec> services,
                  const Confidence& conf, double capacity)
        : duals_(duals), services_(services), conf_(conf), capacity_(capacity) {
        order_.resize(services.size());
        for (std::size_t j = 0; j < services.size(); ++j) order_[j] = static_cast<int>(j);
        std::stable_sort(order_.begin(), order_.end(), [&](int a, int b) {
            return duals_[a] / services_[a].mean > duals_[b] / services_[b].mean;
        });
        current_.assign(services.size(), 0);
        best_counts_.assign(services.size(), 0);
    }

    std::vector<int> run() {
        dfs(0, MachineLoad{}, 0.0);
        return best_counts_;
    }

    double best_value() const { return best_value_; }

private:
    void dfs(std::size_t depth, MachineLoad load, double value) {
        if (value > best_value_) {
            best_value_ = value;
            best_counts_ = current_;
        }
        if (depth == order_.size()) return;

        // Optimistic completion: every remaining service at its solo max fit.
        double bound = value;
        for (std::size_t d = depth; d < order_.size(); ++d) {
            int j = order_[d];
            if (duals_[j] <= 0.0) continue;
            bound += duals_[j] * max_fit_count(services_[j], load, conf_, capacity_);
        }
        if (bound <= best_value_ + 1e-12) return;

        int j = order_[depth];
        int fit = max_fit_count(services_[j], load, conf_, capacity_);
        for (int w = fit; w >= 0; --w) {
            current_[j] = w;
            dfs(depth + 1, load_add(load, services_[j], w), value + duals_[j] * w);
        }
        current_[j] = 0;
    }

    std::span<const double> duals_;
    std::span<const ServiceSpec> services_;
    const Confidence& conf_;
    double capacity_;
    std::vector<int> order_;
    std::vector<int> current_, best_counts_;
    double best_value_ = 0.0;
};

}  // namespace

PricedPattern price_pattern(std::span<const double> duals, std::span<const ServiceSpec> services,
                            const Confidence& conf, double capacity) {
    PricingSearch search(duals, services, conf, capacity);
    std::vector<int> counts = search.run();
    PricedPattern out;
    out.reduced_cost = 1.0 - search.best_value();
    out.pattern = make_pattern(std::move(counts), services, conf);
    return out;
}

namespace {

// Restricted master: min sum v over patterns, coverage >= demands, v >= 0.
lp::LpSolution solve_rmp(const PatternSet& set, std::span<const int> demands) {
    const int k = static_cast<int>(demands.size());
    lp::LinearProgram prog;
    prog.objective.assign(set.size(), 1.0);
    prog.constraints.resize(k);
    for (int r = 0; r < k; ++r) {
        prog.constraints[r].coeffs.resize(set.size());
        for (int c = 0; c < set.size(); ++c)
            prog.constraints[r].coeffs[c] = static_cast<double>(set[c].counts[r]);
        prog.constraints[r].rel = lp::Relation::GreaterEq;
        prog.constraints[r].rhs = static_cast<double>(demands[r]);
    }
    return lp::solve_lp(prog);
}

}  // namespace

ColgenResult generate_patterns(std::span<const ServiceSpec> services, const Confidence& conf,
                               double capacity, std::span<const int> demands, double tol,
                               int max_columns) {
    ColgenResult res;
    res.set = initial_patterns(services, conf, capacity);

    while (true) {
        lp::LpSolution rmp = solve_rmp(res.set, demands);
        ++res.rmp_solves;
        if (rmp.status != lp::LpStatus::Optimal)
            throw SolveError(SolveError::Kind::Internal,
                             "generate_patterns: RMP solve failed with status " +
                                 std::to_string(static_cast<int>(rmp.status)));
        res.final_rmp_objective = rmp.objective_value;

        std::vector<double> duals = rmp.dual;
        for (double& d : duals) d = std::max(d, 0.0);

        PricedPattern priced = price_pattern(duals, services, conf, capacity);
        if (priced.reduced_cost >= -tol) break;
        if (!res.set.add(std::move(priced.pattern))) break;  // duplicate: duals are stale
        ++res.columns_added;
        if (res.columns_added >= max_columns) {
            res.hit_column_cap = true;
            break;
        }
    }
    return res;
}

PatternSet cover_patterns(PatternSet set, const ClusterState& cluster,
                          std::span<const ServiceSpec> services, const Confidence& conf) {
    for (int i = 0; i < cluster.machine_count(); ++i) {
        if (cluster.initial.row_total(i) == 0) continue;
        auto row = cluster.initial.row(i);
        if (set.find_dominating(row) >= 0) continue;

        std::vector<int> counts(row.begin(), row.end());
        set.add(make_pattern(counts, services, conf));

        // Maximal extension: greedy fill in non-increasing b/mean order.
        MachineLoad load = machine_load(counts, services);
        std::vector<int> extended = counts;
        for (int j : service_order_by_uncertainty(services)) {
            int w = max_fit_count(services[j], load, conf, cluster.capacity);
            if (w > 0) {
                extended[j] += w;
                load = load_add(load, services[j], w);
            }
        }
        if (extended != counts) set.add(make_pattern(std::move(extended), services, conf));
    }
    return set;
}

namespace {

void enumerate_rec(std::span<const ServiceSpec> services, const Confidence& conf, double capacity,
                   std::size_t depth, MachineLoad load, std::vector<int>& current,
                   std::vector<Pattern>& out, std::size_t max_count, bool& overflow) {
    if (overflow) return;
    if (depth == services.size()) {
        bool nonzero = false;
        for (int c : current)
            if (c > 0) nonzero = true;
        if (!nonzero) return;
        if (out.size() >= max_count) {
            overflow = true;
            return;
        }
        out.push_back(make_pattern(current, services, conf));
        return;
    }
    int fit = max_fit_count(services[depth], load, conf, capacity);
    for (int w = 0; w <= fit; ++w) {
        current[depth] = w;
        enumerate_rec(services, conf, capacity, depth + 1, load_add(load, services[depth], w),
                      current, out, max_count, overflow);
        if (overflow) return;
    }
    current[depth] = 0;
}

}  // namespace

std::optional<std::vector<Pattern>> enumerate_feasible_patterns(
    std::span<const ServiceSpec> services, const Confidence& conf, double capacity,
    std::size_t max_count) {
    std::vector<Pattern> out;
    std::vector<int> current(services.size(), 0);
    bool overflow = false;
    enumerate_rec(services, conf, capacity, 0, MachineLoad{}, current, out, max_count, overflow);
    if (overflow) return std::nullopt;
    return out;
}

}  // namespace sbp
