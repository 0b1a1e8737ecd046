#pragma once

#include <vector>

#include "sbp/gauss.hpp"
#include "sbp/model.hpp"

namespace sbp {

struct HeuristicConfig {
    Confidence conf;
    // Machine-exhausted cutoff for the bi-level heuristic: move to the next
    // machine once V - C_i drops to this. Defaults to the smallest service
    // mean, i.e. nothing further could fit by mean alone.
    double break_threshold = 0.0;

    static HeuristicConfig defaults(const Instance& inst, const Confidence& conf);
};

struct BfStep {
    int service;
    int machine;
};

// Online best fit under UCaC: containers are expanded service-by-service in
// non-increasing uncertainty/mean order; each goes to the feasible used
// machine with the greatest post-allocation UCaC (lowest index on ties), or
// the lowest-indexed empty machine when no used machine fits.
// Throws SolveError(CapacityExhausted) when the batch cannot be placed.
Placement bf_ucac(const Instance& inst, const Confidence& conf,
                  std::vector<BfStep>* audit = nullptr);

// Deterministic best fit with n-sigma container sizes s_j = mean + n*std,
// n = conf.d_alpha; machine check is sum of sizes <= V.
Placement bf_nsigma(const Instance& inst, const Confidence& conf);

// Bi-level heuristic: machines in non-increasing cumulative-uncertainty
// order, services in non-increasing uncertainty/mean order, max-fit counts
// per (machine, service).
Placement biheu(const Instance& inst, const HeuristicConfig& config);

// Service indices in the shared allocation order (non-increasing b/mean,
// stable on ties).
std::vector<int> service_order_by_uncertainty(std::span<const ServiceSpec> services);

}  // namespace sbp
