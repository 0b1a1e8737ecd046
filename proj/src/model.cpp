#include "sbp/model.hpp"

#include <cmath>
#include <sstream>

#include "sbp/gauss.hpp"
#include "sbp/rng.hpp"

namespace sbp {

std::string ValidationReport::to_string() const {
    std::ostringstream os;
    for (const auto& e : errors) os << e << '\n';
    return os.str();
}

namespace {

bool finite(double x) { return std::isfinite(x); }

}  // namespace

ValidationReport validate_instance(const Instance& inst, const Confidence& conf) {
    ValidationReport rep;
    auto err = [&rep](const std::string& m) { rep.errors.push_back(m); };

    const int k = inst.service_count();
    const auto& cluster = inst.cluster;

    for (int j = 0; j < k; ++j) {
        const auto& s = inst.services[j];
        if (!finite(s.mean) || s.mean <= 0.0)
            err("service " + std::to_string(j) + " (" + s.id + "): mean must be positive");
        if (!finite(s.uncertainty) || s.uncertainty < 0.0)
            err("service " + std::to_string(j) + " (" + s.id + "): uncertainty must be non-negative");
        if (!finite(s.limit) || s.limit <= s.mean)
            err("service " + std::to_string(j) + " (" + s.id + "): limit must exceed mean");
    }

    if (!finite(cluster.capacity) || cluster.capacity <= 0.0) err("capacity must be positive");
    if (cluster.machine_count() < 1) err("machineCount must be at least 1");
    if (cluster.service_count() != k)
        err("initial layout has " + std::to_string(cluster.service_count()) +
            " service columns, expected " + std::to_string(k));

    if (static_cast<int>(inst.request.demands.size()) != k)
        err("request has " + std::to_string(inst.request.demands.size()) + " entries, expected " +
            std::to_string(k));
    for (std::size_t j = 0; j < inst.request.demands.size(); ++j)
        if (inst.request.demands[j] < 0)
            err("request[" + std::to_string(j) + "] must be non-negative");

    if (cluster.service_count() == k) {
        for (int i = 0; i < cluster.machine_count(); ++i) {
            bool neg = false;
            for (int j = 0; j < k; ++j)
                if (cluster.initial(i, j) < 0) neg = true;
            if (neg) {
                err("machine " + std::to_string(i) + ": negative initial count");
                continue;
            }
            MachineLoad load = machine_load(cluster.initial.row(i), inst.services);
            if (!feasible(load, conf, cluster.capacity)) {
                std::ostringstream os;
                os << "machine " << i << " initially infeasible: ucac " << machine_ucac(load, conf)
                   << " > capacity " << cluster.capacity;
                err(os.str());
            }
        }
    }
    return rep;
}

ValidationReport validate_placement(const Instance& inst, const Placement& placement,
                                    const Confidence& conf) {
    ValidationReport rep;
    auto err = [&rep](const std::string& m) { rep.errors.push_back(m); };

    const int k = inst.service_count();
    if (!placement.alloc.same_shape(inst.cluster.initial)) {
        err("placement shape mismatch");
        return rep;
    }
    for (int i = 0; i < placement.alloc.rows(); ++i)
        for (int j = 0; j < k; ++j)
            if (placement.alloc(i, j) < 0)
                err("alloc[" + std::to_string(i) + "][" + std::to_string(j) + "] negative");

    std::vector<int> sums = placement.alloc.col_sums();
    for (int j = 0; j < k; ++j)
        if (sums[j] != inst.request.demands[j])
            err("service " + std::to_string(j) + ": placed " + std::to_string(sums[j]) +
                " of " + std::to_string(inst.request.demands[j]));

    for (int i = 0; i < placement.alloc.rows(); ++i) {
        MachineLoad load;
        for (int j = 0; j < k; ++j) {
            int n = inst.cluster.initial(i, j) + placement.alloc(i, j);
            load.sum_mean += n * inst.services[j].mean;
            load.sum_uncertainty += n * inst.services[j].uncertainty;
        }
        if (!feasible(load, conf, inst.cluster.capacity))
            err("machine " + std::to_string(i) + " infeasible after placement");
    }
    return rep;
}

ClusterState apply_placement(const ClusterState& cluster, const Placement& placement) {
    if (!cluster.initial.same_shape(placement.alloc))
        throw SolveError(SolveError::Kind::InvalidInput, "apply_placement: shape mismatch");
    ClusterState out = cluster;
    for (int i = 0; i < out.machine_count(); ++i)
        for (int j = 0; j < out.service_count(); ++j) out.initial(i, j) += placement.alloc(i, j);
    return out;
}

LayoutDiff diff_totals(std::span<const int> target_totals, std::span<const int> current_totals) {
    if (target_totals.size() != current_totals.size())
        throw SolveError(SolveError::Kind::InvalidInput, "diff_totals: shape mismatch");
    LayoutDiff d;
    d.allocations.demands.resize(target_totals.size(), 0);
    d.deletions.resize(target_totals.size(), 0);
    for (std::size_t j = 0; j < target_totals.size(); ++j) {
        int delta = target_totals[j] - current_totals[j];
        d.allocations.demands[j] = delta > 0 ? delta : 0;
        d.deletions[j] = delta < 0 ? -delta : 0;
    }
    return d;
}

LayoutDiff diff_layouts(const CountMatrix& target, const CountMatrix& current) {
    if (!target.same_shape(current))
        throw SolveError(SolveError::Kind::InvalidInput, "diff_layouts: shape mismatch");
    return diff_totals(target.col_sums(), current.col_sums());
}

void remove_containers_random(CountMatrix& layout, int service, int count, Rng& rng) {
    for (int n = 0; n < count; ++n) {
        int hosted = 0;
        for (int i = 0; i < layout.rows(); ++i) hosted += layout(i, service);
        if (hosted == 0)
            throw SolveError(SolveError::Kind::InvalidInput,
                             "remove_containers_random: no containers left for service " +
                                 std::to_string(service));
        int pick = rng.uniform_int(hosted);
        for (int i = 0; i < layout.rows(); ++i) {
            pick -= layout(i, service);
            if (pick < 0) {
                --layout(i, service);
                break;
            }
        }
    }
}

}  // namespace sbp
