#include "sbp/heuristics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sbp {

HeuristicConfig HeuristicConfig::defaults(const Instance& inst, const Confidence& conf) {
    HeuristicConfig cfg;
    cfg.conf = conf;
    double min_mean = std::numeric_limits<double>::infinity();
    for (const auto& s : inst.services) min_mean = std::min(min_mean, s.mean);
    cfg.break_threshold = std::isfinite(min_mean) ? min_mean : 0.0;
    return cfg;
}

std::vector<int> service_order_by_uncertainty(std::span<const ServiceSpec> services) {
    std::vector<int> order(services.size());
    for (std::size_t j = 0; j < services.size(); ++j) order[j] = static_cast<int>(j);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return services[a].uncertainty / services[a].mean >
               services[b].uncertainty / services[b].mean;
    });
    return order;
}

Placement bf_ucac(const Instance& inst, const Confidence& conf, std::vector<BfStep>* audit) {
    const int n = inst.machine_count();
    const int k = inst.service_count();
    const double cap = inst.cluster.capacity;

    std::vector<MachineLoad> loads(n);
    std::vector<bool> used(n, false);
    for (int i = 0; i < n; ++i) {
        loads[i] = machine_load(inst.cluster.initial.row(i), inst.services);
        used[i] = inst.cluster.initial.row_total(i) > 0;
    }

    Placement placement{CountMatrix(n, k)};
    for (int j : service_order_by_uncertainty(inst.services)) {
        const ServiceSpec& svc = inst.services[j];
        for (int c = 0; c < inst.request.demands[j]; ++c) {
            int pick = -1;
            double best = -1.0;
            for (int i = 0; i < n; ++i) {
                if (!used[i]) continue;
                MachineLoad post = load_add(loads[i], svc, 1);
                if (!feasible(post, conf, cap)) continue;
                double u = machine_ucac(post, conf);
                if (u > best) {
                    best = u;
                    pick = i;
                }
            }
            if (pick < 0) {
                for (int i = 0; i < n; ++i) {
                    if (!used[i]) {
                        pick = i;
                        break;
                    }
                }
                if (pick < 0 || !feasible(load_add(loads[pick], svc, 1), conf, cap))
                    throw SolveError(SolveError::Kind::CapacityExhausted,
                                     "bf_ucac: cannot place service " + svc.id);
            }
            loads[pick] = load_add(loads[pick], svc, 1);
            used[pick] = true;
            ++placement.alloc(pick, j);
            if (audit) audit->push_back({j, pick});
        }
    }
    return placement;
}

Placement bf_nsigma(const Instance& inst, const Confidence& conf) {
    const int n = inst.machine_count();
    const int k = inst.service_count();
    const double cap = inst.cluster.capacity;

    std::vector<double> size(k);
    for (int j = 0; j < k; ++j)
        size[j] = inst.services[j].mean + conf.d_alpha * std::sqrt(inst.services[j].uncertainty);

    std::vector<double> det(n, 0.0);
    std::vector<bool> used(n, false);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < k; ++j) det[i] += size[j] * inst.cluster.initial(i, j);
        used[i] = inst.cluster.initial.row_total(i) > 0;
    }

    Placement placement{CountMatrix(n, k)};
    for (int j : service_order_by_uncertainty(inst.services)) {
        for (int c = 0; c < inst.request.demands[j]; ++c) {
            int pick = -1;
            double best = -1.0;
            for (int i = 0; i < n; ++i) {
                if (!used[i]) continue;
                double post = det[i] + size[j];
                if (post > cap + kFeasTol) continue;
                if (post > best) {
                    best = post;
                    pick = i;
                }
            }
            if (pick < 0) {
                for (int i = 0; i < n; ++i) {
                    if (!used[i]) {
                        pick = i;
                        break;
                    }
                }
                if (pick < 0 || size[j] > cap + kFeasTol)
                    throw SolveError(SolveError::Kind::CapacityExhausted,
                                     "bf_nsigma: cannot place service " + inst.services[j].id);
            }
            det[pick] += size[j];
            used[pick] = true;
            ++placement.alloc(pick, j);
        }
    }
    return placement;
}

Placement biheu(const Instance& inst, const HeuristicConfig& config) {
    const int n = inst.machine_count();
    const int k = inst.service_count();
    const double cap = inst.cluster.capacity;
    const Confidence& conf = config.conf;

    std::vector<MachineLoad> loads(n);
    for (int i = 0; i < n; ++i) loads[i] = machine_load(inst.cluster.initial.row(i), inst.services);

    std::vector<int> machine_order(n);
    for (int i = 0; i < n; ++i) machine_order[i] = i;
    std::stable_sort(machine_order.begin(), machine_order.end(), [&](int a, int b) {
        return loads[a].sum_uncertainty > loads[b].sum_uncertainty;
    });

    std::vector<int> service_order = service_order_by_uncertainty(inst.services);
    std::vector<int> remaining = inst.request.demands;

    Placement placement{CountMatrix(n, k)};
    for (int i : machine_order) {
        for (int j : service_order) {
            if (remaining[j] == 0) continue;
            const ServiceSpec& svc = inst.services[j];
            int w = std::min(max_fit_count(svc, loads[i], conf, cap), remaining[j]);
            if (w > 0) {
                placement.alloc(i, j) += w;
                loads[i] = load_add(loads[i], svc, w);
                remaining[j] -= w;
            }
            if (cap - loads[i].sum_mean <= config.break_threshold) break;
        }
    }

    for (int j = 0; j < k; ++j)
        if (remaining[j] > 0)
            throw SolveError(SolveError::Kind::CapacityExhausted,
                             "biheu: " + std::to_string(remaining[j]) +
                                 " containers of service " + inst.services[j].id + " unplaced");
    return placement;
}

}  // namespace sbp
