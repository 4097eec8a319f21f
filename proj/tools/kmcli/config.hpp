#pragma once

#include "kernmoment/estimators.hpp"
#include "kernmoment/kernelproc.hpp"
#include "kernmoment/moments.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace kmcli {

using json = nlohmann::json;

// Process block of a config file:
//
//   {"kind": "rff", "d": 5, "sigma_x": 1.0, "sigma": 0.25}
//
// Covariances may be a scalar (times I_d), a list of d diagonal entries, or a
// d x d nested list. "scale" applies to the linear process; "eigenvalue" is
// accepted as an alternative and sets scale = sqrt(eigenvalue).
kernmoment::GenerativeProcess parse_process(const json& j);
json process_to_json(const kernmoment::GenerativeProcess& process);

kernmoment::NoiseModel parse_noise(const json& j);

kernmoment::Orientation parse_orientation(const std::string& s);
std::vector<kernmoment::EstimatorKind> parse_estimator_list(const std::string& csv);
std::vector<kernmoment::EstimatorKind> parse_estimator_list(const json& j);

/// Reads a JSON object; missing file -> IoError, bad syntax or non-object -> ConfigError.
json load_config(const std::filesystem::path& path);

/// FNV-1a over the canonical (sorted-key) dump, as 16 hex digits.
std::string config_hash(const json& j);

/// Typed accessors that raise ConfigError naming the key on a type mismatch.
template <typename T>
T get_or(const json& j, const std::string& key, const T& fallback) {
    if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw kernmoment::ConfigError("config key '" + key + "': " + e.what());
    }
}

template <typename T>
T require(const json& j, const std::string& key) {
    if (!j.is_object() || !j.contains(key)) throw kernmoment::ConfigError("config key '" + key + "' is required");
    return get_or<T>(j, key, T{});
}

/// Analytic moments when the process has a closed form (RFF, linear).
std::optional<kernmoment::MomentSequence> ground_truth(const kernmoment::GenerativeProcess& process, int n_max);

}  // namespace kmcli
