#include "sbp/gauss.hpp"

#include <cmath>
#include <stdexcept>

#include "sbp/rng.hpp"

namespace sbp {

double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.70710678118654752440); }

namespace detail {

// Peter Acklam's rational approximation to the inverse normal CDF.
// Relative error below 1.15e-9 over (0,1).
double normal_quantile_fast(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double plow = 0.02425;

    if (p < plow) {
        double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - plow) {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    double q = p - 0.5;
    double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace detail

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("normal_quantile: p must be in (0,1)");
    double x = detail::normal_quantile_fast(p);
    // One Newton step against the erfc-based CDF lands at machine precision.
    double pdf = 0.39894228040143267794 * std::exp(-0.5 * x * x);
    if (pdf > 0.0) x -= (normal_cdf(x) - p) / pdf;
    return x;
}

Confidence Confidence::from_alpha(double alpha) {
    if (!(alpha > 0.5 && alpha < 1.0))
        throw std::domain_error("Confidence: alpha must be in (0.5, 1)");
    return {alpha, normal_quantile(alpha)};
}

Confidence Confidence::from_sigma_factor(double n) {
    if (!(n > 0.0)) throw std::domain_error("Confidence: sigma factor must be positive");
    return {normal_cdf(n), n};
}

double machine_ucac(const MachineLoad& load, const Confidence& conf) {
    if (load.sum_uncertainty <= 0.0) return load.sum_mean;
    return load.sum_mean + conf.d_alpha * std::sqrt(load.sum_uncertainty);
}

MachineLoad machine_load(std::span<const int> counts, std::span<const ServiceSpec> services) {
    MachineLoad load;
    for (std::size_t j = 0; j < counts.size(); ++j) {
        load.sum_mean += counts[j] * services[j].mean;
        load.sum_uncertainty += counts[j] * services[j].uncertainty;
    }
    return load;
}

MachineLoad load_add(const MachineLoad& base, const ServiceSpec& svc, int copies) {
    return {base.sum_mean + copies * svc.mean, base.sum_uncertainty + copies * svc.uncertainty};
}

double cluster_ucac(const ClusterState& cluster, std::span<const ServiceSpec> services,
                    const Confidence& conf) {
    double total = 0.0;
    for (int i = 0; i < cluster.machine_count(); ++i)
        total += machine_ucac(machine_load(cluster.initial.row(i), services), conf);
    return total;
}

double cluster_ucac(const ClusterState& cluster, const Placement& placement,
                    std::span<const ServiceSpec> services, const Confidence& conf) {
    double total = 0.0;
    const int k = cluster.service_count();
    for (int i = 0; i < cluster.machine_count(); ++i) {
        MachineLoad load;
        for (int j = 0; j < k; ++j) {
            int n = cluster.initial(i, j) + placement.alloc(i, j);
            load.sum_mean += n * services[j].mean;
            load.sum_uncertainty += n * services[j].uncertainty;
        }
        total += machine_ucac(load, conf);
    }
    return total;
}

bool feasible(const MachineLoad& load, const Confidence& conf, double capacity) {
    return machine_ucac(load, conf) <= capacity + kFeasTol;
}

int max_fit_count(const ServiceSpec& svc, const MachineLoad& base, const Confidence& conf,
                  double capacity) {
    if (!feasible(base, conf, capacity)) return 0;
    if (!feasible(load_add(base, svc, 1), conf, capacity)) return 0;
    if (svc.mean <= 0.0) throw SolveError(SolveError::Kind::InvalidInput, "max_fit_count: mean must be positive");

    // Mean usage alone bounds the count; the sqrt term only tightens it.
    int hi = static_cast<int>((capacity + kFeasTol - base.sum_mean) / svc.mean) + 1;
    int lo = 1;  // feasible
    while (lo < hi) {
        int mid = lo + (hi - lo + 1) / 2;
        if (feasible(load_add(base, svc, mid), conf, capacity))
            lo = mid;
        else
            hi = mid - 1;
    }
    return lo;
}

double Rng::normal(double mean, double sd) {
    return mean + sd * detail::normal_quantile_fast(uniform01());
}

double Rng::exponential(double rate) { return -std::log(uniform01()) / rate; }

std::vector<int> Rng::sample_without_replacement(int n, int k) {
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    // Partial Fisher-Yates: the first k entries are the sample.
    for (int i = 0; i < k && i < n - 1; ++i) {
        int j = i + uniform_int(n - i);
        std::swap(idx[i], idx[j]);
    }
    idx.resize(k);
    return idx;
}

}  // namespace sbp
