#pragma once

#include <span>

#include "sbp/model.hpp"

namespace sbp {

// Absolute tolerance applied to every UCaC-vs-capacity comparison so all
// solvers agree on knife-edge fits.
inline constexpr double kFeasTol = 1e-9;

// Standard normal CDF.
double normal_cdf(double x);

// Standard normal quantile, |error| <= 1e-8 absolute (rational approximation
// plus one Newton step against erfc). Throws std::domain_error outside (0,1).
double normal_quantile(double p);

namespace detail {
// Raw rational approximation (~1e-9), no refinement. Cheap enough for bulk
// inverse-CDF sampling.
double normal_quantile_fast(double p);
}  // namespace detail

// Confidence level alpha with its cached normal quantile D(alpha).
struct Confidence {
    double alpha = 0.0;
    double d_alpha = 0.0;

    // alpha must lie in (0.5, 1).
    static Confidence from_alpha(double alpha);
    // Builds from an explicit sigma multiplier n > 0 (alpha = Phi(n)).
    static Confidence from_sigma_factor(double n);
};

// U = sum_mean + D(alpha) * sqrt(sum_uncertainty).
double machine_ucac(const MachineLoad& load, const Confidence& conf);

// Load of `counts` containers per service (optionally on top of `base`).
MachineLoad machine_load(std::span<const int> counts, std::span<const ServiceSpec> services);
MachineLoad load_add(const MachineLoad& base, const ServiceSpec& svc, int copies);

// Sum of machine UCaC over all machines; empty machines contribute 0.
double cluster_ucac(const ClusterState& cluster, std::span<const ServiceSpec> services,
                    const Confidence& conf);
double cluster_ucac(const ClusterState& cluster, const Placement& placement,
                    std::span<const ServiceSpec> services, const Confidence& conf);

// Chance-constraint check: machine_ucac <= capacity + kFeasTol.
bool feasible(const MachineLoad& load, const Confidence& conf, double capacity);

// Largest integer w >= 0 with base + w copies of svc still feasible; binary
// search on the monotone load (requires svc.mean > 0, else the count is
// unbounded when even one fits).
int max_fit_count(const ServiceSpec& svc, const MachineLoad& base, const Confidence& conf,
                  double capacity);

}  // namespace sbp
