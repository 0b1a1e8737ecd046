#pragma once

#include <string>

#include <json.hpp>

#include "sbp/colgen.hpp"
#include "sbp/model.hpp"

namespace sbp::io {

using nlohmann::json;

// Canonical instance document:
//   {"capacity": V, "services": [{"id","mean","variance","limit"}...],
//    "initial": [[...]], "request": [...]}
json encode_instance(const Instance& inst);
Instance decode_instance(const json& j);

// {"alloc": [[...]]}
json encode_placement(const Placement& p);
Placement decode_placement(const json& j);

// Pattern cache document: header echoing (capacity, alpha, service
// fingerprint) plus the pattern array.
json encode_pattern_cache(const PatternSet& set, double capacity, double alpha,
                          const std::vector<ServiceSpec>& services);
// Returns false when the header does not match the requested key.
bool decode_pattern_cache(const json& j, double capacity, double alpha,
                          const std::vector<ServiceSpec>& services, PatternSet* out);

// Stable fingerprint of (services, capacity, alpha); keys cache files.
std::string instance_fingerprint(const std::vector<ServiceSpec>& services, double capacity,
                                 double alpha);

Instance load_instance_file(const std::string& path);
void write_json_file(const std::string& path, const json& j);
json load_json_file(const std::string& path);

}  // namespace sbp::io
