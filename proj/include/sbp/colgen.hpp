#pragma once

#include <optional>
#include <vector>

#include "sbp/gauss.hpp"
#include "sbp/model.hpp"

namespace sbp {

// A feasible per-machine combination of container counts (one cutting-stock
// column) together with its UCaC.
struct Pattern {
    std::vector<int> counts;
    double ucac = 0.0;
};

Pattern make_pattern(std::vector<int> counts, std::span<const ServiceSpec> services,
                     const Confidence& conf);

class PatternSet {
public:
    // Returns true when the pattern was new.
    bool add(Pattern p);
    bool contains(const std::vector<int>& counts) const;
    // Index of some pattern componentwise >= counts, or -1.
    int find_dominating(std::span<const int> counts) const;

    const Pattern& operator[](int i) const { return patterns_[i]; }
    int size() const { return static_cast<int>(patterns_.size()); }
    const std::vector<Pattern>& patterns() const { return patterns_; }

private:
    std::vector<Pattern> patterns_;
};

// K diagonal patterns; pattern k holds max_fit_count containers of service k.
// Throws when some service cannot fit even one container.
PatternSet initial_patterns(std::span<const ServiceSpec> services, const Confidence& conf,
                            double capacity);

struct PricedPattern {
    Pattern pattern;
    double reduced_cost = 0.0;
};

// Exact pricing: maximizes duals^T p over feasible patterns by depth-first
// branch and bound (services in non-increasing dual/mean order, fractional
// bound from per-service max additional fits).
PricedPattern price_pattern(std::span<const double> duals, std::span<const ServiceSpec> services,
                            const Confidence& conf, double capacity);

struct ColgenResult {
    PatternSet set;
    bool hit_column_cap = false;
    int columns_added = 0;
    int rmp_solves = 0;
    double final_rmp_objective = 0.0;
};

// Column generation on the cutting-stock relaxation: solve the restricted
// master over the current set, price with its duals, add while the reduced
// cost is below -tol.
ColgenResult generate_patterns(std::span<const ServiceSpec> services, const Confidence& conf,
                               double capacity, std::span<const int> demands, double tol = 1e-6,
                               int max_columns = 500);

// Ensures every nonempty machine has a componentwise-dominating pattern by
// adding the machine's own counts plus a maximal greedy extension of them.
PatternSet cover_patterns(PatternSet set, const ClusterState& cluster,
                          std::span<const ServiceSpec> services, const Confidence& conf);

// All feasible nonzero patterns, or nullopt once more than max_count exist.
std::optional<std::vector<Pattern>> enumerate_feasible_patterns(
    std::span<const ServiceSpec> services, const Confidence& conf, double capacity,
    std::size_t max_count);

}  // namespace sbp
