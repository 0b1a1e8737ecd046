// Compares the serial reference and the OpenMP Monte Carlo violation kernel
// on a packed synthetic layout and checks they agree exactly.

#include <chrono>
#include <iostream>

#include "sbp/heuristics.hpp"
#include "sbp/sim.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace sbp;

int main(int argc, char** argv) {
    long samples = argc > 1 ? std::atol(argv[1]) : 20000;
    int machines = argc > 2 ? std::atoi(argv[2]) : 100;

    Confidence conf = Confidence::from_alpha(0.999);
    sim::GeneratedServices gen = sim::gen_services(5, 42);

    Instance inst;
    inst.services = gen.services;
    inst.cluster.capacity = 31.58;
    inst.cluster.initial = CountMatrix(machines, 5);
    inst.request.demands.assign(5, 0);
    for (std::size_t j = 0; j < gen.base_counts.size(); ++j)
        inst.request.demands[j] = std::max(1, gen.base_counts[j] * machines / 2000);

    Placement placement = biheu(inst, HeuristicConfig::defaults(inst, conf));
    ClusterState state = apply_placement(inst.cluster, placement);

#ifdef _OPENMP
    std::cout << "OpenMP threads: " << omp_get_max_threads() << "\n";
#else
    std::cout << "OpenMP: not enabled\n";
#endif

    auto time = [&](auto&& fn, const char* name) {
        auto t0 = std::chrono::steady_clock::now();
        sim::ViolationReport rep = fn();
        auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                      .count();
        std::cout << name << ": rate=" << 100.0 * rep.machine_sample_violation_rate << "% over "
                  << rep.used_machines << " machines x " << rep.samples << " rounds in " << ms
                  << " ms\n";
        return rep;
    };

    auto serial = time(
        [&] { return sim::evaluate_violations_serial(state, inst.services, samples, 7); },
        "serial  ");
    auto parallel = time(
        [&] { return sim::evaluate_violations(state, inst.services, samples, 7); }, "parallel");

    bool same = serial.machine_sample_violation_rate == parallel.machine_sample_violation_rate &&
                serial.per_machine_rates == parallel.per_machine_rates;
    std::cout << (same ? "kernels agree" : "KERNEL MISMATCH") << "\n";
    return same ? 0 : 1;
}
