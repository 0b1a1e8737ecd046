#include "sbp/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "sbp/heuristics.hpp"
#include "sbp/rng.hpp"

namespace sbp::sim {

namespace {

// Stream tags so the sub-generators of one scenario seed stay independent.
constexpr std::uint64_t kStreamServices = 0x5e71;
constexpr std::uint64_t kStreamRemoval = 0xde1e;
constexpr std::uint64_t kStreamDiff = 0xd1ff;
constexpr std::uint64_t kStreamViolation = 0x7101;
constexpr std::uint64_t kStreamDay = 0xda70;

PoolEntry pool_row(double mean, double stddev, int containers, double remove_rate) {
    return {mean, stddev, containers, remove_rate, mean + 4.0 * stddev};
}

}  // namespace

const std::vector<PoolEntry>& service_pool() {
    static const std::vector<PoolEntry> pool = {
        pool_row(6.18, 1.73, 270, 0.5),  pool_row(2.47, 0.47, 55, 0.3),
        pool_row(1.07, 0.43, 1618, 0.8), pool_row(4.12, 2.69, 904, 0.5),
        pool_row(1.06, 0.85, 576, 0.8),  pool_row(0.73, 0.19, 1085, 0.8),
        pool_row(1.94, 0.90, 1035, 0.5), pool_row(2.48, 0.82, 118, 0.5),
        pool_row(2.42, 0.97, 1450, 0.5), pool_row(2.49, 0.62, 313, 0.5),
        pool_row(0.97, 0.31, 44, 0.8),   pool_row(2.46, 0.62, 544, 0.3),
        pool_row(2.52, 0.84, 697, 0.5),  pool_row(1.06, 0.57, 427, 0.8),
        pool_row(2.59, 0.70, 363, 0.3),  pool_row(1.96, 0.55, 360, 0.3),
        pool_row(3.33, 0.90, 701, 0.5),
    };
    return pool;
}

GeneratedServices gen_services(int k, std::uint64_t seed, double jitter_lo, double jitter_hi) {
    const auto& pool = service_pool();
    if (k < 1 || k > static_cast<int>(pool.size()))
        throw SolveError(SolveError::Kind::InvalidInput,
                         "gen_services: K must be in [1, " + std::to_string(pool.size()) + "]");

    Rng rng(seed_mix(seed, kStreamServices));
    GeneratedServices out;
    out.pool_rows = rng.sample_without_replacement(static_cast<int>(pool.size()), k);
    for (int row : out.pool_rows) {
        const PoolEntry& e = pool[row];
        double factor = rng.uniform(jitter_lo, jitter_hi);
        double sd = e.stddev * factor;
        ServiceSpec spec;
        spec.id = "svc" + std::to_string(row);
        spec.mean = e.mean;
        spec.uncertainty = sd * sd;
        spec.limit = e.limit;
        out.services.push_back(std::move(spec));
        out.base_counts.push_back(e.containers);
        out.remove_rates.push_back(e.remove_rate);
    }
    return out;
}

std::vector<double> sample_usage(const ServiceSpec& svc, long count, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> draws(count);
    double sd = std::sqrt(svc.uncertainty);
    for (long i = 0; i < count; ++i)
        draws[i] = std::clamp(rng.normal(svc.mean, sd), 0.0, svc.limit);
    return draws;
}

double gen_workload_usage(const WorkloadDist& dist, long n, std::uint64_t seed) {
    Rng rng(seed);
    double total = 0.0;
    for (long i = 0; i < n; ++i) {
        switch (dist.kind) {
            case WorkloadDist::Kind::Degenerate: total += dist.a; break;
            case WorkloadDist::Kind::Exponential: total += rng.exponential(dist.a); break;
            case WorkloadDist::Kind::Uniform: total += rng.uniform(dist.a, dist.b); break;
        }
    }
    return total;
}

namespace {

struct ViolationKernel {
    const ClusterState& state;
    std::span<const ServiceSpec> services;
    std::uint64_t seed;
    bool clamp;
    std::vector<int> used;
    std::vector<double> sd;

    ViolationKernel(const ClusterState& s, std::span<const ServiceSpec> svcs, std::uint64_t sd_,
                    bool cl)
        : state(s), services(svcs), seed(sd_), clamp(cl) {
        for (int i = 0; i < state.machine_count(); ++i)
            if (state.initial.row_total(i) > 0) used.push_back(i);
        sd.resize(services.size());
        for (std::size_t j = 0; j < services.size(); ++j) sd[j] = std::sqrt(services[j].uncertainty);
    }

    // One Monte Carlo round; bumps the violation counter of each machine
    // whose sampled total exceeds capacity.
    void round(long r, std::vector<long>& violations) const {
        Rng rng(seed_mix(seed, static_cast<std::uint64_t>(r)));
        const int k = static_cast<int>(services.size());
        for (std::size_t u = 0; u < used.size(); ++u) {
            int i = used[u];
            double total = 0.0;
            for (int j = 0; j < k; ++j) {
                int c = state.initial(i, j);
                for (int t = 0; t < c; ++t) {
                    double x = rng.normal(services[j].mean, sd[j]);
                    if (clamp) x = std::clamp(x, 0.0, services[j].limit);
                    total += x;
                }
            }
            if (total > state.capacity) ++violations[u];
        }
    }

    ViolationReport report(long samples, const std::vector<long>& violations) const {
        ViolationReport rep;
        rep.samples = samples;
        rep.used_machines = static_cast<int>(used.size());
        rep.per_machine_rates.assign(state.machine_count(), 0.0);
        long total = 0;
        for (std::size_t u = 0; u < used.size(); ++u) {
            total += violations[u];
            if (samples > 0)
                rep.per_machine_rates[used[u]] =
                    static_cast<double>(violations[u]) / static_cast<double>(samples);
        }
        if (!used.empty() && samples > 0)
            rep.machine_sample_violation_rate =
                static_cast<double>(total) / (static_cast<double>(used.size()) * samples);
        return rep;
    }
};

}  // namespace

ViolationReport evaluate_violations_serial(const ClusterState& state,
                                           std::span<const ServiceSpec> services, long samples,
                                           std::uint64_t seed, bool clamp) {
    ViolationKernel kernel(state, services, seed, clamp);
    std::vector<long> violations(kernel.used.size(), 0);
    for (long r = 0; r < samples; ++r) kernel.round(r, violations);
    return kernel.report(samples, violations);
}

ViolationReport evaluate_violations(const ClusterState& state,
                                    std::span<const ServiceSpec> services, long samples,
                                    std::uint64_t seed, bool clamp) {
    ViolationKernel kernel(state, services, seed, clamp);
    std::vector<long> violations(kernel.used.size(), 0);
#ifdef _OPENMP
#pragma omp parallel
    {
        std::vector<long> local(kernel.used.size(), 0);
#pragma omp for schedule(static)
        for (long r = 0; r < samples; ++r) kernel.round(r, local);
#pragma omp critical
        for (std::size_t u = 0; u < local.size(); ++u) violations[u] += local[u];
    }
#else
    for (long r = 0; r < samples; ++r) kernel.round(r, violations);
#endif
    return kernel.report(samples, violations);
}

ViolationReport evaluate_violations(const ClusterState& cluster, const Placement& placement,
                                    std::span<const ServiceSpec> services, long samples,
                                    std::uint64_t seed, bool clamp) {
    return evaluate_violations(apply_placement(cluster, placement), services, samples, seed, clamp);
}

NonemptyLayout gen_nonempty_layout(const std::vector<ServiceSpec>& services, int machines,
                                   double capacity, const Confidence& conf,
                                   std::span<const int> base_counts,
                                   std::span<const double> removal_rates, std::uint64_t seed,
                                   const PatternSet& patterns, const CspBudget& budget) {
    const int k = static_cast<int>(services.size());
    Instance pack;
    pack.services = services;
    pack.cluster.capacity = capacity;
    pack.cluster.initial = CountMatrix(machines, k);
    pack.request.demands.assign(base_counts.begin(), base_counts.end());

    CspSolution sol = solve_csp(pack, patterns, CspObjective::Ucac, budget, conf);
    if (sol.pattern_of.empty() && sol.status != CspStatus::Optimal)
        throw SolveError(SolveError::Kind::CapacityExhausted,
                         "gen_nonempty_layout: initial pack infeasible within " +
                             std::to_string(machines) + " machines");
    Placement placed = placement_from_patterns(sol, pack, conf);

    NonemptyLayout out;
    out.packed = apply_placement(pack.cluster, placed);
    out.current = out.packed;

    // Independent per-container removal at each service's rate.
    Rng rng(seed_mix(seed, kStreamRemoval));
    for (int j = 0; j < k; ++j) {
        double rate = removal_rates[j];
        for (int i = 0; i < machines; ++i) {
            int c = out.current.initial(i, j);
            int kept = 0;
            for (int t = 0; t < c; ++t)
                if (rng.uniform01() >= rate) ++kept;
            out.current.initial(i, j) = kept;
        }
    }
    return out;
}

LayoutDiff gen_requests(const CountMatrix& initial, const CountMatrix& current, double scale) {
    std::vector<int> target = initial.col_sums();
    for (int& t : target) t = static_cast<int>(std::lround(scale * t));
    return diff_totals(target, current.col_sums());
}

std::string to_string(ScenarioKind k) {
    switch (k) {
        case ScenarioKind::Empty: return "empty";
        case ScenarioKind::ScaleDown: return "scale-down";
        case ScenarioKind::ScaleUp: return "scale-up";
    }
    return "?";
}

namespace {

// Enumerate everything when the pattern space is tiny (keeps small instances
// exact); column generation otherwise.
PatternSet pipeline_patterns(const std::vector<ServiceSpec>& services, const Confidence& conf,
                             double capacity, std::span<const int> need, bool* capped) {
    if (auto all = enumerate_feasible_patterns(services, conf, capacity, 2000)) {
        PatternSet set;
        for (auto& p : *all) set.add(std::move(p));
        if (capped) *capped = false;
        return set;
    }
    ColgenResult res = generate_patterns(services, conf, capacity, need);
    if (capped) *capped = res.hit_column_cap;
    return std::move(res.set);
}

std::vector<int> scaled_base_counts(const GeneratedServices& gen, const ScenarioConfig& config) {
    double scale = static_cast<double>(config.machines) / config.full_scale_machines;
    std::vector<int> counts(gen.base_counts.size());
    for (std::size_t j = 0; j < counts.size(); ++j)
        counts[j] = static_cast<int>(std::lround(gen.base_counts[j] * scale));
    return counts;
}

}  // namespace

ScenarioInstance build_scenario(const ScenarioConfig& config, ScenarioKind kind) {
    Confidence conf = Confidence::from_alpha(config.alpha);
    ScenarioInstance scen;
    scen.gen = gen_services(config.k, config.seed, config.jitter_lo, config.jitter_hi);

    std::vector<int> base = scaled_base_counts(scen.gen, config);
    scen.inst.services = scen.gen.services;
    scen.inst.cluster.capacity = config.capacity;
    scen.inst.cluster.initial = CountMatrix(config.machines, config.k);

    std::vector<int> need = base;
    scen.patterns = pipeline_patterns(scen.inst.services, conf, config.capacity, need,
                                      &scen.patterns_capped);

    if (kind == ScenarioKind::Empty) {
        scen.inst.request.demands = base;
        return scen;
    }

    std::span<const double> rates = scen.gen.remove_rates;
    if (!config.removal_override.empty()) {
        if (static_cast<int>(config.removal_override.size()) != config.k)
            throw SolveError(SolveError::Kind::InvalidInput,
                             "removal_override must have K entries");
        rates = config.removal_override;
    }
    NonemptyLayout layout =
        gen_nonempty_layout(scen.inst.services, config.machines, config.capacity, conf, base,
                            rates, config.seed, scen.patterns, config.csp_budget);

    // Scale-down default calibrated so the request overflows the n-sigma
    // room of the half-emptied machines (the regime the trend bands assume).
    double scale = config.scale_factor > 0.0
                       ? config.scale_factor
                       : (kind == ScenarioKind::ScaleDown ? 0.85 : 1.2);
    LayoutDiff diff = gen_requests(layout.packed.initial, layout.current.initial, scale);

    // Apply the deletion side before solving the allocation side.
    Rng rng(seed_mix(config.seed, kStreamDiff));
    for (int j = 0; j < config.k; ++j)
        if (diff.deletions[j] > 0)
            remove_containers_random(layout.current.initial, j, diff.deletions[j], rng);

    scen.inst.cluster = layout.current;
    scen.inst.request = diff.allocations;
    return scen;
}

AlgoResult run_algorithm(const std::string& algo, const ScenarioInstance& scen,
                         const ScenarioConfig& config, const Placement* extra_warm) {
    Confidence conf = Confidence::from_alpha(config.alpha);
    AlgoResult res;
    res.row.algo = algo;
    res.row.alpha = config.alpha;
    res.row.k = config.k;
    res.row.seed = static_cast<std::int64_t>(config.seed);

    auto t0 = std::chrono::steady_clock::now();
    try {
        if (algo == "bf-nsigma") {
            res.placement = bf_nsigma(scen.inst, conf);
        } else if (algo == "bf-ucac") {
            res.placement = bf_ucac(scen.inst, conf);
        } else if (algo == "biheu") {
            res.placement = biheu(scen.inst, HeuristicConfig::defaults(scen.inst, conf));
        } else if (algo == "csp-ucac" || algo == "csp-mac") {
            PatternSet covered = cover_patterns(scen.patterns, scen.inst.cluster,
                                                scen.inst.services, conf);
            CspObjective objective =
                algo == "csp-ucac" ? CspObjective::Ucac : CspObjective::MachineCount;
            CspSolution sol =
                solve_csp(scen.inst, covered, objective, config.csp_budget, conf, extra_warm);
            if (sol.pattern_of.empty() && sol.status != CspStatus::Optimal)
                throw SolveError(SolveError::Kind::CapacityExhausted,
                                 algo + ": no feasible assignment (" + to_string(sol.status) + ")");
            res.placement = placement_from_patterns(sol, scen.inst, conf);
        } else {
            throw SolveError(SolveError::Kind::InvalidInput, "unknown algorithm " + algo);
        }
        res.solved = true;
    } catch (const SolveError& e) {
        res.row.error = e.what();
    }
    auto t1 = std::chrono::steady_clock::now();
    res.row.solve_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

    if (res.solved) {
        ClusterState after = apply_placement(scen.inst.cluster, res.placement);
        res.row.ucac = cluster_ucac(after, scen.inst.services, conf);
        int machines = 0;
        for (int i = 0; i < after.machine_count(); ++i)
            if (after.initial.row_total(i) > 0) ++machines;
        res.row.machines = machines;
        ViolationReport rep =
            evaluate_violations(after, scen.inst.services, config.violation_samples,
                                seed_mix(config.seed, kStreamViolation), config.clamp_sampling);
        res.row.violation_pct = 100.0 * rep.machine_sample_violation_rate;
    }
    return res;
}

std::vector<MetricsRow> run_scenario(const ScenarioConfig& config, ScenarioKind kind,
                                     std::vector<AlgoResult>* details) {
    ScenarioInstance scen = build_scenario(config, kind);

    std::vector<AlgoResult> results;
    const Placement* mac_placement = nullptr;
    for (const std::string& algo : algorithm_names()) {
        // csp-mac runs before csp-ucac so its solution can seed the UCaC
        // incumbent (cheap way to keep the two solvers comparable).
        if (algo == "csp-ucac") continue;
        results.push_back(run_algorithm(algo, scen, config));
        if (algo == "csp-mac" && results.back().solved) mac_placement = &results.back().placement;
    }
    AlgoResult ucac_res = run_algorithm("csp-ucac", scen, config, mac_placement);
    results.insert(results.begin() + 3, std::move(ucac_res));

    double base_ucac = 0.0;
    int base_machines = 0;
    for (const auto& r : results)
        if (r.row.algo == "bf-nsigma" && r.solved) {
            base_ucac = r.row.ucac;
            base_machines = r.row.machines;
        }

    std::vector<MetricsRow> rows;
    for (auto& r : results) {
        r.row.scenario = to_string(kind);
        if (r.solved && base_ucac > 0.0) {
            r.row.ucac_norm = r.row.ucac / base_ucac;
            r.row.machines_norm =
                base_machines > 0 ? static_cast<double>(r.row.machines) / base_machines : 0.0;
        }
        rows.push_back(r.row);
    }
    if (details) *details = std::move(results);
    return rows;
}

std::vector<MetricsRow> run_scenario_seeds(const ScenarioConfig& config, ScenarioKind kind,
                                           int seeds) {
    std::vector<MetricsRow> all;
    for (int s = 0; s < seeds; ++s) {
        ScenarioConfig cfg = config;
        cfg.seed = config.seed + static_cast<std::uint64_t>(s);
        for (auto& row : run_scenario(cfg, kind)) all.push_back(std::move(row));
    }
    // Average rows (seed = -1) per algorithm over clean runs.
    for (const std::string& algo : algorithm_names()) {
        MetricsRow avg;
        avg.scenario = to_string(kind);
        avg.algo = algo;
        avg.alpha = config.alpha;
        avg.k = config.k;
        avg.seed = -1;
        int n = 0;
        for (const auto& row : all) {
            if (row.algo != algo || !row.error.empty() || row.seed < 0) continue;
            avg.ucac += row.ucac;
            avg.ucac_norm += row.ucac_norm;
            avg.machines += row.machines;
            avg.machines_norm += row.machines_norm;
            avg.violation_pct += row.violation_pct;
            avg.solve_ms += row.solve_ms;
            ++n;
        }
        if (n > 0) {
            avg.ucac /= n;
            avg.ucac_norm /= n;
            avg.machines = static_cast<int>(std::lround(static_cast<double>(avg.machines) / n));
            avg.machines_norm /= n;
            avg.violation_pct /= n;
            avg.solve_ms /= n;
            all.push_back(std::move(avg));
        }
    }
    return all;
}

std::vector<MetricsRow> run_multiday(const ScenarioConfig& config, int days,
                                     std::span<const double> day_scales, const std::string& algo) {
    if (days < 1)
        throw SolveError(SolveError::Kind::InvalidInput, "run_multiday: days must be >= 1");
    Confidence conf = Confidence::from_alpha(config.alpha);

    GeneratedServices gen = gen_services(config.k, config.seed, config.jitter_lo, config.jitter_hi);
    std::vector<int> base = scaled_base_counts(gen, config);

    Instance inst;
    inst.services = gen.services;
    inst.cluster.capacity = config.capacity;
    inst.cluster.initial = CountMatrix(config.machines, config.k);

    bool capped = false;
    PatternSet patterns =
        pipeline_patterns(gen.services, conf, config.capacity, base, &capped);

    CountMatrix base_layout;  // day-1 layout; later targets scale its totals
    std::vector<MetricsRow> rows;

    for (int day = 1; day <= days; ++day) {
        if (day == 1) {
            inst.request.demands = base;
        } else {
            double scale = day_scales.empty()
                               ? 1.0
                               : day_scales[(day - 2) % day_scales.size()];
            std::vector<int> target = base_layout.col_sums();
            for (int& t : target) t = static_cast<int>(std::lround(scale * t));
            LayoutDiff diff = diff_totals(target, inst.cluster.initial.col_sums());
            Rng rng(seed_mix(config.seed, seed_mix(kStreamDay, static_cast<std::uint64_t>(day))));
            for (int j = 0; j < config.k; ++j)
                if (diff.deletions[j] > 0)
                    remove_containers_random(inst.cluster.initial, j, diff.deletions[j], rng);
            inst.request = diff.allocations;
        }

        ScenarioInstance scen;
        scen.inst = inst;
        scen.gen = gen;
        scen.patterns = patterns;
        scen.patterns_capped = capped;

        AlgoResult res = run_algorithm(algo, scen, config);
        res.row.scenario = "multiday";
        res.row.day = day;
        if (!res.solved) {
            rows.push_back(res.row);
            break;
        }
        inst.cluster = apply_placement(inst.cluster, res.placement);
        if (day == 1) base_layout = inst.cluster.initial;
        rows.push_back(res.row);
    }
    return rows;
}

std::string metrics_csv_header(bool with_day) {
    std::string h = "scenario,algo,alpha,K,seed,ucac,ucac_norm,machines,machines_norm,"
                    "violation_pct,solve_ms";
    if (with_day) h = "day," + h;
    return h;
}

std::string metrics_csv_row(const MetricsRow& row, bool with_day) {
    std::ostringstream os;
    os.precision(10);
    if (with_day) os << row.day << ',';
    os << row.scenario << ',' << row.algo << ',' << row.alpha << ',' << row.k << ',' << row.seed
       << ',' << row.ucac << ',' << row.ucac_norm << ',' << row.machines << ','
       << row.machines_norm << ',' << row.violation_pct << ',' << row.solve_ms;
    return os.str();
}

std::vector<double> machine_ucacs(const ClusterState& state, std::span<const ServiceSpec> services,
                                  const Confidence& conf) {
    std::vector<double> out(state.machine_count());
    for (int i = 0; i < state.machine_count(); ++i)
        out[i] = machine_ucac(machine_load(state.initial.row(i), services), conf);
    return out;
}

}  // namespace sbp::sim
