#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sbp {

struct Confidence;  // gauss.hpp

// One container type. `uncertainty` is the variance of the per-container
// usage under the Gaussian model (squared cores); `limit` caps what a single
// container can draw and is only consulted by the usage sampler.
struct ServiceSpec {
    std::string id;
    double mean = 0.0;
    double uncertainty = 0.0;
    double limit = 0.0;
};

// Dense row-major integer matrix, one row per machine, one column per service.
class CountMatrix {
public:
    CountMatrix() = default;
    CountMatrix(int rows, int cols, int fill = 0)
        : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {
        if (rows < 0 || cols < 0) throw std::invalid_argument("CountMatrix: negative shape");
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    int& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
    int operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

    std::span<const int> row(int i) const {
        return {data_.data() + static_cast<std::size_t>(i) * cols_, static_cast<std::size_t>(cols_)};
    }

    std::vector<int> col_sums() const {
        std::vector<int> s(cols_, 0);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) s[j] += (*this)(i, j);
        return s;
    }

    int row_total(int i) const {
        int t = 0;
        for (int j = 0; j < cols_; ++j) t += (*this)(i, j);
        return t;
    }

    bool same_shape(const CountMatrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
    bool operator==(const CountMatrix&) const = default;

private:
    int rows_ = 0, cols_ = 0;
    std::vector<int> data_;
};

// Machines share one capacity V; `initial` holds the containers already
// placed (the z matrix).
struct ClusterState {
    double capacity = 0.0;
    CountMatrix initial;

    int machine_count() const { return initial.rows(); }
    int service_count() const { return initial.cols(); }
};

struct BatchRequest {
    std::vector<int> demands;
};

struct Placement {
    CountMatrix alloc;
};

// Aggregated per-machine load: sum of means and sum of variances of every
// hosted container.
struct MachineLoad {
    double sum_mean = 0.0;
    double sum_uncertainty = 0.0;
};

struct Instance {
    std::vector<ServiceSpec> services;
    ClusterState cluster;
    BatchRequest request;

    int service_count() const { return static_cast<int>(services.size()); }
    int machine_count() const { return cluster.machine_count(); }
};

struct ValidationReport {
    std::vector<std::string> errors;
    bool ok() const { return errors.empty(); }
    std::string to_string() const;
};

class SolveError : public std::runtime_error {
public:
    enum class Kind { CapacityExhausted, InvalidInput, Internal };
    SolveError(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

// Checks every type invariant and returns the full list of violations,
// including per-machine chance-constraint feasibility of the initial layout.
ValidationReport validate_instance(const Instance& inst, const Confidence& conf);

// Placement invariants: non-negative counts, column sums equal to the
// request, and initial+alloc feasible on every machine.
ValidationReport validate_placement(const Instance& inst, const Placement& placement,
                                    const Confidence& conf);

// initial' = initial + alloc; capacity and machine count unchanged.
ClusterState apply_placement(const ClusterState& cluster, const Placement& placement);

struct LayoutDiff {
    BatchRequest allocations;
    std::vector<int> deletions;
};

// Per-service totals only: allocations_j = max(0, sum(target_j) - sum(current_j)),
// deletions_j the other direction.
LayoutDiff diff_totals(std::span<const int> target_totals, std::span<const int> current_totals);
LayoutDiff diff_layouts(const CountMatrix& target, const CountMatrix& current);

class Rng;

// Removes `count` containers of service j, victims drawn uniformly over the
// container instances currently hosted (machine weight = its count).
void remove_containers_random(CountMatrix& layout, int service, int count, Rng& rng);

}  // namespace sbp
