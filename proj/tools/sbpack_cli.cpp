#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "sbp/cspsolve.hpp"
#include "sbp/heuristics.hpp"
#include "sbp/io.hpp"
#include "sbp/sim.hpp"

namespace {

using namespace sbp;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;       // I/O, validation, bad arguments
constexpr int kExitInfeasible = 2;  // capacity exhausted / no feasible assignment

std::string default_cache_path(const std::vector<ServiceSpec>& services, double capacity,
                               double alpha) {
    const char* dir = std::getenv("SBPACK_CACHE_DIR");
    std::filesystem::path base = dir ? dir : "pattern-cache";
    return (base / (io::instance_fingerprint(services, capacity, alpha) + ".json")).string();
}

PatternSet load_or_generate_patterns(const Instance& inst, const Confidence& conf,
                                     const std::string& cache_path, bool force, bool quiet) {
    if (!force && !cache_path.empty() && std::filesystem::exists(cache_path)) {
        PatternSet cached;
        if (io::decode_pattern_cache(io::load_json_file(cache_path), inst.cluster.capacity,
                                     conf.alpha, inst.services, &cached)) {
            if (!quiet)
                std::cout << "cache hit: " << cached.size() << " patterns from " << cache_path
                          << "\n";
            return cached;
        }
        if (!quiet) std::cout << "cache mismatch, regenerating\n";
    }

    auto t0 = std::chrono::steady_clock::now();
    auto totz = inst.cluster.initial.col_sums();
    std::vector<int> need(inst.service_count());
    for (int j = 0; j < inst.service_count(); ++j) need[j] = inst.request.demands[j] + totz[j];

    PatternSet set;
    bool capped = false;
    if (auto all = enumerate_feasible_patterns(inst.services, conf, inst.cluster.capacity, 2000)) {
        for (auto& p : *all) set.add(std::move(p));
    } else {
        ColgenResult res = generate_patterns(inst.services, conf, inst.cluster.capacity, need);
        capped = res.hit_column_cap;
        set = std::move(res.set);
    }
    auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0);
    if (!quiet) {
        std::cout << "patterns: " << set.size() << " (generated in " << ms.count() << " ms)\n";
        if (capped) std::cout << "warning: column cap reached, pattern set may be incomplete\n";
    }
    if (!cache_path.empty()) {
        std::filesystem::path p(cache_path);
        if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
        io::write_json_file(cache_path,
                            io::encode_pattern_cache(set, inst.cluster.capacity, conf.alpha,
                                                     inst.services));
    }
    return set;
}

int cmd_solve(const std::string& instance_path, const std::string& out_path,
              const std::string& algo, double alpha, double nsigma, double time_limit,
              std::int64_t node_limit, const std::string& patterns_path,
              const std::string& dump_path) {
    Instance inst = io::load_instance_file(instance_path);
    Confidence conf =
        nsigma > 0.0 ? Confidence::from_sigma_factor(nsigma) : Confidence::from_alpha(alpha);

    ValidationReport report = validate_instance(inst, conf);
    if (!report.ok()) {
        std::cerr << "invalid instance:\n" << report.to_string();
        return kExitError;
    }

    CspBudget budget{time_limit, node_limit};
    Placement placement;
    auto t0 = std::chrono::steady_clock::now();
    try {
        if (algo == "bf-nsigma") {
            placement = bf_nsigma(inst, conf);
        } else if (algo == "bf-ucac") {
            placement = bf_ucac(inst, conf);
        } else if (algo == "biheu") {
            placement = biheu(inst, HeuristicConfig::defaults(inst, conf));
        } else {
            std::string cache = patterns_path;
            PatternSet set = load_or_generate_patterns(inst, conf, cache, false, true);
            set = cover_patterns(std::move(set), inst.cluster, inst.services, conf);
            CspObjective objective =
                algo == "csp-ucac" ? CspObjective::Ucac : CspObjective::MachineCount;
            CspSolution sol = solve_csp(inst, set, objective, budget, conf);
            if (sol.pattern_of.empty() && sol.status != CspStatus::Optimal) {
                std::cerr << "no feasible assignment (" << to_string(sol.status) << ")\n";
                return kExitInfeasible;
            }
            placement = placement_from_patterns(sol, inst, conf);
            if (!dump_path.empty()) {
                io::json dump;
                dump["status"] = to_string(sol.status);
                dump["objective"] = sol.objective;
                dump["gap"] = sol.gap;
                io::json w = io::json::array();
                for (int i = 0; i < inst.machine_count(); ++i)
                    if (sol.pattern_of[i] >= 0) w.push_back({i, sol.pattern_of[i]});
                dump["w"] = std::move(w);
                io::json pats = io::json::array();
                for (const auto& p : sol.patterns.patterns())
                    pats.push_back({{"counts", p.counts}, {"ucac", p.ucac}});
                dump["patterns"] = std::move(pats);
                dump["placement"] = io::encode_placement(placement);
                io::write_json_file(dump_path, dump);
            }
        }
    } catch (const SolveError& e) {
        if (e.kind() == SolveError::Kind::CapacityExhausted) {
            std::cerr << e.what() << "\n";
            return kExitInfeasible;
        }
        throw;
    }
    auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0);

    ClusterState after = apply_placement(inst.cluster, placement);
    double ucac = cluster_ucac(after, inst.services, conf);
    int machines = 0;
    for (int i = 0; i < after.machine_count(); ++i)
        if (after.initial.row_total(i) > 0) ++machines;

    if (!out_path.empty()) io::write_json_file(out_path, io::encode_placement(placement));
    std::cout << "algo=" << algo << " ucac=" << ucac << " machines=" << machines
              << " solve_ms=" << ms.count() << "\n";
    return kExitOk;
}

void write_csv(const std::string& path, const std::vector<sim::MetricsRow>& rows, bool with_day) {
    std::ofstream out(path);
    if (!out) throw SolveError(SolveError::Kind::InvalidInput, path + ": cannot open for writing");
    out << sim::metrics_csv_header(with_day) << "\n";
    for (const auto& row : rows) out << sim::metrics_csv_row(row, with_day) << "\n";
}

int cmd_simulate(const sim::ScenarioConfig& config, const std::string& scenario_name, int seeds,
                 int multiday, const std::vector<double>& day_scales, const std::string& out_path,
                 const std::string& dump_dir) {
    if (multiday > 0) {
        std::vector<sim::MetricsRow> rows;
        for (const std::string& algo : sim::algorithm_names()) {
            auto daily = sim::run_multiday(config, multiday, day_scales, algo);
            rows.insert(rows.end(), daily.begin(), daily.end());
        }
        write_csv(out_path, rows, true);
        std::cout << "wrote " << rows.size() << " rows to " << out_path << "\n";
        for (const auto& row : rows)
            if (!row.error.empty())
                std::cerr << "warning: " << row.algo << " day " << row.day << ": " << row.error
                          << "\n";
        return kExitOk;
    }

    sim::ScenarioKind kind;
    if (scenario_name == "empty") kind = sim::ScenarioKind::Empty;
    else if (scenario_name == "scale-down") kind = sim::ScenarioKind::ScaleDown;
    else if (scenario_name == "scale-up") kind = sim::ScenarioKind::ScaleUp;
    else {
        std::cerr << "unknown scenario " << scenario_name << "\n";
        return kExitError;
    }

    std::vector<sim::MetricsRow> rows = sim::run_scenario_seeds(config, kind, seeds);
    write_csv(out_path, rows, false);
    std::cout << "wrote " << rows.size() << " rows to " << out_path << "\n";
    for (const auto& row : rows)
        if (!row.error.empty())
            std::cerr << "warning: " << row.algo << " seed " << row.seed << ": " << row.error
                      << "\n";

    if (!dump_dir.empty()) {
        std::filesystem::create_directories(dump_dir);
        Confidence conf = Confidence::from_alpha(config.alpha);
        std::vector<sim::AlgoResult> details;
        sim::ScenarioConfig cfg = config;  // dump the first seed's layouts
        sim::run_scenario(cfg, kind, &details);
        sim::ScenarioInstance scen = sim::build_scenario(cfg, kind);
        for (const auto& res : details) {
            if (!res.solved) continue;
            ClusterState after = apply_placement(scen.inst.cluster, res.placement);
            io::json arr = sim::machine_ucacs(after, scen.inst.services, conf);
            io::write_json_file((std::filesystem::path(dump_dir) /
                                 (scenario_name + "_" + res.row.algo + "_ucac.json"))
                                    .string(),
                                arr);
        }
    }
    return kExitOk;
}

int cmd_patterns(const std::string& instance_path, double alpha, std::string cache_path,
                 bool force) {
    Instance inst = io::load_instance_file(instance_path);
    Confidence conf = Confidence::from_alpha(alpha);
    if (cache_path.empty())
        cache_path = default_cache_path(inst.services, inst.cluster.capacity, alpha);
    load_or_generate_patterns(inst, conf, cache_path, force, false);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic bin packing under Gaussian chance constraints"};
    app.require_subcommand(1);

    // solve
    std::string instance_path, out_path, algo = "bf-ucac", patterns_path, dump_path;
    double alpha = 0.99, nsigma = 0.0, time_limit = 60.0;
    std::int64_t node_limit = 100000;
    auto* solve = app.add_subcommand("solve", "Solve one allocation instance");
    solve->add_option("-i,--instance", instance_path, "Instance JSON")->required();
    solve->add_option("-o,--out", out_path, "Placement JSON output");
    solve->add_option("--algo", algo, "Algorithm")
        ->check(CLI::IsMember({"bf-nsigma", "bf-ucac", "biheu", "csp-ucac", "csp-mac"}));
    solve->add_option("--alpha", alpha, "Confidence level in (0.5, 1)");
    solve->add_option("--nsigma", nsigma, "Explicit sigma factor (overrides --alpha)");
    solve->add_option("--time-limit", time_limit, "CSP wall-clock budget, seconds");
    solve->add_option("--node-limit", node_limit, "CSP node budget");
    solve->add_option("--patterns", patterns_path, "Pattern cache file");
    solve->add_option("--dump", dump_path, "CSP solution dump JSON");

    // simulate
    sim::ScenarioConfig config;
    std::string scenario_name = "scale-down", csv_path = "metrics.csv", dump_dir;
    int seeds = 5, multiday = 0;
    std::uint64_t seed = 1;
    std::vector<double> day_scales = {0.7, 1.2, 0.8, 1.1, 0.9, 1.2};
    auto* simulate = app.add_subcommand("simulate", "Run the synthetic evaluation protocol");
    simulate->add_option("--scenario", scenario_name, "empty | scale-down | scale-up");
    simulate->add_option("--k", config.k, "Number of services (1..17)");
    simulate->add_option("--alpha", config.alpha, "Confidence level");
    simulate->add_option("--machines", config.machines, "Cluster size");
    simulate->add_option("--capacity", config.capacity, "Machine capacity, cores");
    simulate->add_option("--scale", config.scale_factor, "Target scale factor");
    simulate->add_option("--seeds", seeds, "Number of seeds");
    simulate->add_option("--seed", seed, "Base seed");
    simulate->add_option("--samples", config.violation_samples, "Monte Carlo rounds");
    simulate->add_flag("--no-clamp", [&](std::int64_t) { config.clamp_sampling = false; },
                       "Sample without the (0, limit) clamp");
    simulate->add_option("--multiday", multiday, "Run D consecutive days instead");
    simulate->add_option("--day-scales", day_scales, "Per-day scale factors (days 2+)");
    simulate->add_option("--node-limit", config.csp_budget.node_limit, "CSP node budget");
    simulate->add_option("--time-limit", config.csp_budget.time_limit_sec, "CSP time budget, s");
    simulate->add_option("-o,--out", csv_path, "Metrics CSV path");
    simulate->add_option("--dump-dir", dump_dir, "Per-machine UCaC dump directory");

    // patterns
    std::string pat_instance, pat_cache;
    double pat_alpha = 0.99;
    bool pat_force = false;
    auto* patterns = app.add_subcommand("patterns", "Generate or refresh a pattern cache");
    patterns->add_option("-i,--instance", pat_instance, "Instance JSON")->required();
    patterns->add_option("--alpha", pat_alpha, "Confidence level");
    patterns->add_option("--cache", pat_cache, "Cache file (default by fingerprint)");
    patterns->add_flag("--force", pat_force, "Regenerate even on cache hit");

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed())
            return cmd_solve(instance_path, out_path, algo, alpha, nsigma, time_limit, node_limit,
                             patterns_path, dump_path);
        if (simulate->parsed()) {
            config.seed = seed;
            return cmd_simulate(config, scenario_name, seeds, multiday, day_scales, csv_path,
                                dump_dir);
        }
        if (patterns->parsed()) return cmd_patterns(pat_instance, pat_alpha, pat_cache, pat_force);
    } catch (const SolveError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.kind() == SolveError::Kind::CapacityExhausted ? kExitInfeasible : kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}
