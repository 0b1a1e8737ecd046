#include "sbp/io.hpp"

#include <fstream>
#include <sstream>

namespace sbp::io {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw SolveError(SolveError::Kind::InvalidInput, path + ": " + what);
}

double require_number(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected number");
    return j.get<double>();
}

int require_int(const json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected integer");
    return j.get<int>();
}

const json& require_field(const json& j, const char* key, const std::string& path) {
    if (!j.is_object()) fail(path, "expected object");
    auto it = j.find(key);
    if (it == j.end()) fail(path + "." + key, "missing field");
    return *it;
}

CountMatrix decode_matrix(const json& j, const std::string& path, int expect_cols) {
    if (!j.is_array()) fail(path, "expected array of arrays");
    int rows = static_cast<int>(j.size());
    int cols = expect_cols;
    if (rows > 0) {
        if (!j[0].is_array()) fail(path + "[0]", "expected array");
        if (cols < 0) cols = static_cast<int>(j[0].size());
    }
    if (cols < 0) cols = 0;
    CountMatrix m(rows, cols);
    for (int i = 0; i < rows; ++i) {
        const json& row = j[i];
        if (!row.is_array() || static_cast<int>(row.size()) != cols)
            fail(path + "[" + std::to_string(i) + "]",
                 "expected array of length " + std::to_string(cols));
        for (int c = 0; c < cols; ++c)
            m(i, c) = require_int(row[c],
                                  path + "[" + std::to_string(i) + "][" + std::to_string(c) + "]");
    }
    return m;
}

json encode_matrix(const CountMatrix& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

json encode_instance(const Instance& inst) {
    json j;
    j["capacity"] = inst.cluster.capacity;
    json services = json::array();
    for (const auto& s : inst.services)
        services.push_back(
            {{"id", s.id}, {"mean", s.mean}, {"variance", s.uncertainty}, {"limit", s.limit}});
    j["services"] = std::move(services);
    j["initial"] = encode_matrix(inst.cluster.initial);
    j["request"] = inst.request.demands;
    return j;
}

Instance decode_instance(const json& j) {
    Instance inst;
    inst.cluster.capacity = require_number(require_field(j, "capacity", "instance"), "instance.capacity");

    const json& services = require_field(j, "services", "instance");
    if (!services.is_array()) fail("instance.services", "expected array");
    for (std::size_t i = 0; i < services.size(); ++i) {
        std::string path = "instance.services[" + std::to_string(i) + "]";
        const json& s = services[i];
        ServiceSpec spec;
        const json& id = require_field(s, "id", path);
        if (!id.is_string()) fail(path + ".id", "expected string");
        spec.id = id.get<std::string>();
        spec.mean = require_number(require_field(s, "mean", path), path + ".mean");
        spec.uncertainty = require_number(require_field(s, "variance", path), path + ".variance");
        spec.limit = require_number(require_field(s, "limit", path), path + ".limit");
        inst.services.push_back(std::move(spec));
    }

    inst.cluster.initial = decode_matrix(require_field(j, "initial", "instance"), "instance.initial",
                                         static_cast<int>(inst.services.size()));

    const json& req = require_field(j, "request", "instance");
    if (!req.is_array()) fail("instance.request", "expected array");
    for (std::size_t i = 0; i < req.size(); ++i)
        inst.request.demands.push_back(require_int(req[i], "instance.request[" + std::to_string(i) + "]"));
    return inst;
}

json encode_placement(const Placement& p) { return json{{"alloc", encode_matrix(p.alloc)}}; }

Placement decode_placement(const json& j) {
    return {decode_matrix(require_field(j, "alloc", "placement"), "placement.alloc", -1)};
}

std::string instance_fingerprint(const std::vector<ServiceSpec>& services, double capacity,
                                 double alpha) {
    // FNV-1a over a canonical text rendering.
    std::ostringstream os;
    os.precision(17);
    os << capacity << '|' << alpha;
    for (const auto& s : services) os << '|' << s.id << ';' << s.mean << ';' << s.uncertainty;
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : os.str()) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    std::ostringstream hex;
    hex << std::hex << h;
    return hex.str();
}

json encode_pattern_cache(const PatternSet& set, double capacity, double alpha,
                          const std::vector<ServiceSpec>& services) {
    json j;
    j["capacity"] = capacity;
    j["alpha"] = alpha;
    j["fingerprint"] = instance_fingerprint(services, capacity, alpha);
    json arr = json::array();
    for (const auto& p : set.patterns()) arr.push_back({{"counts", p.counts}, {"ucac", p.ucac}});
    j["patterns"] = std::move(arr);
    return j;
}

bool decode_pattern_cache(const json& j, double capacity, double alpha,
                          const std::vector<ServiceSpec>& services, PatternSet* out) {
    if (!j.is_object() || !j.contains("fingerprint") || !j.contains("patterns")) return false;
    if (j["fingerprint"] != instance_fingerprint(services, capacity, alpha)) return false;
    PatternSet set;
    for (const auto& p : j["patterns"]) {
        Pattern pat;
        pat.counts = p.at("counts").get<std::vector<int>>();
        pat.ucac = p.at("ucac").get<double>();
        set.add(std::move(pat));
    }
    *out = std::move(set);
    return true;
}

Instance load_instance_file(const std::string& path) { return decode_instance(load_json_file(path)); }

void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) fail(path, "cannot open for writing");
    out << j.dump(2) << '\n';
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(path, "cannot open");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        fail(path, std::string("malformed JSON: ") + e.what());
    }
    return j;
}

}  // namespace sbp::io
