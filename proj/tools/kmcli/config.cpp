#include "kmcli/config.hpp"

#include "kernmoment/analytic.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace kmcli {

using kernmoment::ConfigError;

namespace {

Eigen::MatrixXd parse_covariance(const json& j, int d, const std::string& key) {
    if (j.is_number()) return j.get<double>() * Eigen::MatrixXd::Identity(d, d);
    if (!j.is_array()) throw ConfigError("'" + key + "' must be a number, a diagonal list, or a matrix");
    if (static_cast<int>(j.size()) != d)
        throw ConfigError("'" + key + "' has " + std::to_string(j.size()) + " entries, expected d = " + std::to_string(d));
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        const json& row = j[static_cast<std::size_t>(i)];
        if (row.is_number()) {
            m(i, i) = row.get<double>();
        } else if (row.is_array() && static_cast<int>(row.size()) == d) {
            for (int k = 0; k < d; ++k) {
                if (!row[static_cast<std::size_t>(k)].is_number()) throw ConfigError("'" + key + "' has a non-numeric entry");
                m(i, k) = row[static_cast<std::size_t>(k)].get<double>();
            }
        } else {
            throw ConfigError("'" + key + "' row " + std::to_string(i) + " is malformed");
        }
    }
    return m;
}

json covariance_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

kernmoment::GenerativeProcess parse_process(const json& j) {
    if (!j.is_object()) throw ConfigError("'process' must be an object");
    const auto kind = kernmoment::parse_process_kind(require<std::string>(j, "kind"));
    const int d = require<int>(j, "d");
    if (d < 1) throw ConfigError("process.d must be >= 1");
    const Eigen::MatrixXd sigma_x = j.contains("sigma_x") ? parse_covariance(j.at("sigma_x"), d, "sigma_x")
                                                          : Eigen::MatrixXd::Identity(d, d);
    switch (kind) {
        case kernmoment::ProcessKind::RFF: {
            const Eigen::MatrixXd sigma =
                j.contains("sigma") ? parse_covariance(j.at("sigma"), d, "sigma") : Eigen::MatrixXd::Identity(d, d);
            return kernmoment::GenerativeProcess::rff(sigma_x, sigma);
        }
        case kernmoment::ProcessKind::LinearGaussian: {
            double scale = get_or<double>(j, "scale", 1.0);
            if (j.contains("eigenvalue")) {
                const double ev = get_or<double>(j, "eigenvalue", 1.0);
                if (!(ev >= 0.0)) throw ConfigError("process.eigenvalue must be nonnegative");
                scale = std::sqrt(ev);
            }
            return kernmoment::GenerativeProcess::linear(sigma_x, scale);
        }
        case kernmoment::ProcessKind::ReLURandomFeature: return kernmoment::GenerativeProcess::relu(sigma_x);
    }
    throw ConfigError("unsupported process kind");
}

json process_to_json(const kernmoment::GenerativeProcess& process) {
    json j{{"kind", kernmoment::to_string(process.kind())},
           {"d", process.dim()},
           {"sigma_x", covariance_to_json(process.sigma_x())}};
    if (process.kind() == kernmoment::ProcessKind::RFF) j["sigma"] = covariance_to_json(process.sigma());
    if (process.kind() == kernmoment::ProcessKind::LinearGaussian) j["scale"] = process.scale();
    return j;
}

kernmoment::NoiseModel parse_noise(const json& j) {
    kernmoment::NoiseModel noise;
    if (j.is_null()) return noise;
    if (!j.is_object()) throw ConfigError("'noise' must be an object");
    noise.kind = kernmoment::parse_noise_kind(get_or<std::string>(j, "kind", "none"));
    noise.sigma_noise = get_or<double>(j, "sigma", 0.0);
    noise.trials = get_or<int>(j, "trials", 1);
    if (noise.trials < 1) throw ConfigError("noise.trials must be >= 1");
    if (!(noise.sigma_noise >= 0.0)) throw ConfigError("noise.sigma must be nonnegative");
    return noise;
}

kernmoment::Orientation parse_orientation(const std::string& s) {
    if (s == "auto") return kernmoment::Orientation::Auto;
    if (s == "asis") return kernmoment::Orientation::AsIs;
    if (s == "transposed") return kernmoment::Orientation::Transposed;
    throw ConfigError("unknown orientation '" + s + "' (expected auto, asis or transposed)");
}

std::vector<kernmoment::EstimatorKind> parse_estimator_list(const std::string& csv) {
    std::vector<kernmoment::EstimatorKind> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        // "dp-alt" picks the two-trial or T-trial variant from the trial count later.
        out.push_back(item == "dp-alt" ? kernmoment::EstimatorKind::DPAlt2 : kernmoment::parse_estimator_kind(item));
    }
    if (out.empty()) throw ConfigError("empty estimator list");
    return out;
}

std::vector<kernmoment::EstimatorKind> parse_estimator_list(const json& j) {
    if (j.is_string()) return parse_estimator_list(j.get<std::string>());
    if (!j.is_array()) throw ConfigError("'estimators' must be a list or a comma-separated string");
    std::string joined;
    for (const json& e : j) {
        if (!e.is_string()) throw ConfigError("'estimators' entries must be strings");
        joined += e.get<std::string>() + ",";
    }
    return parse_estimator_list(joined);
}

json load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw kernmoment::IoError("cannot open config " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }
    if (!j.is_object()) throw ConfigError("config " + path.string() + " must contain a JSON object");
    return j;
}

std::string config_hash(const json& j) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : j.dump()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::optional<kernmoment::MomentSequence> ground_truth(const kernmoment::GenerativeProcess& process, int n_max) {
    switch (process.kind()) {
        case kernmoment::ProcessKind::RFF:
            return kernmoment::rbf_moments(kernmoment::make_rbf_spec(process.sigma_x(), process.sigma()), n_max);
        case kernmoment::ProcessKind::LinearGaussian: {
            // Kernel scale^2 x'y: eigenvalues scale^2 times those of sigma_x.
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(process.sigma_x(), Eigen::EigenvaluesOnly);
            const Eigen::VectorXd ev = es.eigenvalues() * (process.scale() * process.scale());
            kernmoment::MomentSequence m;
            m.estimator = kernmoment::EstimatorKind::Analytic;
            m.n_max = n_max;
            for (int n = 1; n <= n_max; ++n) m.values[n] = ev.array().pow(n).sum();
            return m;
        }
        case kernmoment::ProcessKind::ReLURandomFeature: return std::nullopt;
    }
    return std::nullopt;
}

}  // namespace kmcli
