#include "kernmoment/moments_io.hpp"

#include "kernmoment/common.hpp"

#include "json.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <utility>

namespace kernmoment {

namespace {

constexpr std::array<std::pair<EstimatorKind, const char*>, 10> kTags{{
    {EstimatorKind::Naive, "naive"},
    {EstimatorKind::KVRow, "kv-row"},
    {EstimatorKind::KVCol, "kv-col"},
    {EstimatorKind::ExactN2, "exact2"},
    {EstimatorKind::DP, "dp"},
    {EstimatorKind::DPAlt2, "dp-alt2"},
    {EstimatorKind::DPAltT, "dp-altT"},
    {EstimatorKind::BruteForceIncreasing, "brute-increasing"},
    {EstimatorKind::BruteForceAllPaths, "brute-all"},
    {EstimatorKind::Analytic, "analytic"},
}};

}  // namespace

std::string to_string(EstimatorKind kind) {
    for (const auto& [k, tag] : kTags)
        if (k == kind) return tag;
    return "unknown";
}

EstimatorKind parse_estimator_kind(const std::string& tag) {
    for (const auto& [k, t] : kTags)
        if (tag == t) return k;
    std::string known;
    for (const auto& [k, t] : kTags) known += std::string(known.empty() ? "" : ", ") + t;
    throw ConfigError("unknown estimator '" + tag + "' (expected one of: " + known + ")");
}

double MomentSequence::at(int n) const {
    auto it = values.find(n);
    if (it == values.end())
        throw NumericError(to_string(estimator) + ": no value for n = " + std::to_string(n));
    return it->second;
}

std::string format_double(double v) {
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc{}) throw IoError("format_double: conversion failed");
    return std::string(buf.data(), end);
}

void write_moments_csv(const std::filesystem::path& path, const std::vector<MomentSequence>& moments,
                       const std::string& comment) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    if (!comment.empty()) out << "# " << comment << '\n';
    out << "estimator,n,value\n";
    for (const MomentSequence& m : moments)
        for (const auto& [n, v] : m.values) out << to_string(m.estimator) << ',' << n << ',' << format_double(v) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

std::vector<MomentSequence> read_moments_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<MomentSequence> out;
    std::string line;
    bool header = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            if (line != "estimator,n,value") throw IoError(path.string() + ": missing header estimator,n,value");
            header = true;
            continue;
        }
        const auto c1 = line.find(',');
        const auto c2 = c1 == std::string::npos ? c1 : line.find(',', c1 + 1);
        if (c2 == std::string::npos) throw IoError(path.string() + ":" + std::to_string(line_no) + ": malformed row");
        const std::string tag = line.substr(0, c1);
        int n = 0;
        double v = 0.0;
        const char* nb = line.data() + c1 + 1;
        const char* vb = line.data() + c2 + 1;
        const char* ve = line.data() + line.size();
        if (std::from_chars(nb, line.data() + c2, n).ec != std::errc{} || std::from_chars(vb, ve, v).ec != std::errc{})
            throw IoError(path.string() + ":" + std::to_string(line_no) + ": malformed number");
        EstimatorKind kind;
        try {
            kind = parse_estimator_kind(tag);
        } catch (const ConfigError& e) {
            throw IoError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
        if (out.empty() || out.back().estimator != kind) {
            out.emplace_back();
            out.back().estimator = kind;
        }
        out.back().values[n] = v;
        out.back().n_max = std::max(out.back().n_max, n);
    }
    if (!header) throw IoError(path.string() + ": empty moments file");
    return out;
}

void write_moments_json(const std::filesystem::path& path, const std::vector<MomentSequence>& moments) {
    nlohmann::json doc = nlohmann::json::array();
    for (const MomentSequence& m : moments) {
        nlohmann::json values = nlohmann::json::object();
        for (const auto& [n, v] : m.values) values[std::to_string(n)] = v;
        doc.push_back({{"estimator", to_string(m.estimator)},
                       {"n_max", m.n_max},
                       {"values", values},
                       {"p", m.meta.p},
                       {"q", m.meta.q},
                       {"seed", m.meta.seed},
                       {"trials", m.meta.trials},
                       {"wall_seconds", m.wall_seconds}});
    }
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << doc.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace kernmoment
