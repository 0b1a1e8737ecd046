#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sbp/colgen.hpp"
#include "sbp/cspsolve.hpp"
#include "sbp/gauss.hpp"
#include "sbp/model.hpp"

namespace sbp::sim {

// Per-service statistics of the 17-service synthetic pool (usage limit is
// mean + 4*std; the sampler clamps draws there).
struct PoolEntry {
    double mean;
    double stddev;
    int containers;
    double remove_rate;
    double limit;
};

const std::vector<PoolEntry>& service_pool();

struct GeneratedServices {
    std::vector<ServiceSpec> services;
    std::vector<int> base_counts;      // pool container counts of the drawn rows
    std::vector<double> remove_rates;  // pool removal rates of the drawn rows
    std::vector<int> pool_rows;
};

// K pool rows drawn without replacement; each std gets an independent
// U(jitter_lo, jitter_hi) factor, variance = (std')^2.
GeneratedServices gen_services(int k, std::uint64_t seed, double jitter_lo = 0.9,
                               double jitter_hi = 1.1);

// `count` draws from N(mean, variance) clamped to [0, limit].
std::vector<double> sample_usage(const ServiceSpec& svc, long count, std::uint64_t seed);

struct WorkloadDist {
    enum class Kind { Degenerate, Exponential, Uniform } kind = Kind::Degenerate;
    double a = 1.0;  // value | rate | lower
    double b = 0.0;  // unused | unused | upper
};

// One draw of Y^(n): the sum of n independent workload usages.
double gen_workload_usage(const WorkloadDist& dist, long n, std::uint64_t seed);

struct ViolationReport {
    long samples = 0;
    int used_machines = 0;
    double machine_sample_violation_rate = 0.0;
    std::vector<double> per_machine_rates;  // one entry per machine, 0 for unused
};

// Monte Carlo estimate: per round, every hosted container's usage is drawn
// (clamped to [0, limit] unless clamp=false) and a used machine violates when
// its sampled total exceeds capacity. Rate = violations / (used * samples).
// `evaluate_violations` runs rounds OpenMP-parallel over disjoint seed
// streams and returns bit-identical counts to the serial reference.
ViolationReport evaluate_violations_serial(const ClusterState& state,
                                           std::span<const ServiceSpec> services, long samples,
                                           std::uint64_t seed, bool clamp = true);
ViolationReport evaluate_violations(const ClusterState& state,
                                    std::span<const ServiceSpec> services, long samples,
                                    std::uint64_t seed, bool clamp = true);
ViolationReport evaluate_violations(const ClusterState& cluster, const Placement& placement,
                                    std::span<const ServiceSpec> services, long samples,
                                    std::uint64_t seed, bool clamp = true);

struct NonemptyLayout {
    ClusterState packed;   // base counts packed onto the empty cluster
    ClusterState current;  // after per-container random removal
};

// Packs base_counts with the cutting-stock UCaC solver, then deletes each
// service's containers independently at its removal rate.
NonemptyLayout gen_nonempty_layout(const std::vector<ServiceSpec>& services, int machines,
                                   double capacity, const Confidence& conf,
                                   std::span<const int> base_counts,
                                   std::span<const double> removal_rates, std::uint64_t seed,
                                   const PatternSet& patterns, const CspBudget& budget);

// Target totals = round(scale * initial totals); difference against current.
LayoutDiff gen_requests(const CountMatrix& initial, const CountMatrix& current, double scale);

enum class ScenarioKind { Empty, ScaleDown, ScaleUp };
std::string to_string(ScenarioKind k);

struct ScenarioConfig {
    std::uint64_t seed = 1;
    int k = 5;
    int machines = 400;           // paper runs 4000; containers scale with machines
    int full_scale_machines = 4000;
    double capacity = 31.58;
    double alpha = 0.999;
    double scale_factor = 0.0;    // 0 -> 0.85 scale-down, 1.2 scale-up
    double jitter_lo = 0.9, jitter_hi = 1.1;
    std::vector<double> removal_override;  // empty -> pool removal rates
    long violation_samples = 10000;
    bool clamp_sampling = true;
    CspBudget csp_budget{600.0, 1500};
};

struct MetricsRow {
    std::string scenario;
    std::string algo;
    double alpha = 0.0;
    int k = 0;
    std::int64_t seed = 0;
    int day = 0;  // 0 outside multi-day runs
    double ucac = 0.0;
    double ucac_norm = 0.0;
    int machines = 0;
    double machines_norm = 0.0;
    double violation_pct = 0.0;
    double solve_ms = 0.0;
    std::string error;
};

inline const std::vector<std::string>& algorithm_names() {
    static const std::vector<std::string> names = {"bf-nsigma", "bf-ucac", "biheu", "csp-ucac",
                                                   "csp-mac"};
    return names;
}

// Ready-to-solve scenario: post-removal cluster plus the batch request.
struct ScenarioInstance {
    Instance inst;
    GeneratedServices gen;
    PatternSet patterns;  // column-generation output (pre-cover)
    bool patterns_capped = false;
};

ScenarioInstance build_scenario(const ScenarioConfig& config, ScenarioKind kind);

struct AlgoResult {
    MetricsRow row;
    Placement placement;
    bool solved = false;
};

// Runs one algorithm on a prepared scenario instance.
AlgoResult run_algorithm(const std::string& algo, const ScenarioInstance& scen,
                         const ScenarioConfig& config, const Placement* extra_warm = nullptr);

// All five algorithms on the same instance, BF-nsigma-normalized metrics.
std::vector<MetricsRow> run_scenario(const ScenarioConfig& config, ScenarioKind kind,
                                     std::vector<AlgoResult>* details = nullptr);

// Rows for every seed in [seed, seed+seeds), plus one seed=-1 average row per
// algorithm.
std::vector<MetricsRow> run_scenario_seeds(const ScenarioConfig& config, ScenarioKind kind,
                                           int seeds);

// Day 1 packs the base counts onto an empty cluster; later days scale the
// base totals by day_scales[d-2], delete the excess at random and allocate
// the shortfall with the given algorithm.
std::vector<MetricsRow> run_multiday(const ScenarioConfig& config, int days,
                                     std::span<const double> day_scales, const std::string& algo);

std::string metrics_csv_header(bool with_day = false);
std::string metrics_csv_row(const MetricsRow& row, bool with_day = false);

// Per-machine UCaC of a layout (for the visual-comparison dumps).
std::vector<double> machine_ucacs(const ClusterState& state, std::span<const ServiceSpec> services,
                                  const Confidence& conf);

}  // namespace sbp::sim
