#pragma once

#include "kernmoment/moments.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace kernmoment {

// Moment tables.
//
// CSV: optional "# key=value ..." comment line, then the header
// "estimator,n,value" and one line per (estimator, n). JSON: an array of
// objects {estimator, n_max, values: {"1": ...}, p, q, seed, trials,
// wall_seconds}.

void write_moments_csv(const std::filesystem::path& path, const std::vector<MomentSequence>& moments,
                       const std::string& comment = {});
std::vector<MomentSequence> read_moments_csv(const std::filesystem::path& path);

void write_moments_json(const std::filesystem::path& path, const std::vector<MomentSequence>& moments);

/// Lossless text for a double (shortest round-trip form).
std::string format_double(double v);

}  // namespace kernmoment
