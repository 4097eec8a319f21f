#include "kernmoment/kernelproc.hpp"

#include "kernmoment/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace kernmoment {

namespace {

Eigen::MatrixXd checked_cholesky(const Eigen::MatrixXd& m, const char* what) {
    if (m.rows() < 1 || m.rows() != m.cols())
        throw NumericError(std::string(what) + " must be a non-empty square matrix");
    if (!m.allFinite()) throw NumericError(std::string(what) + " has non-finite entries");
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, m.cwiseAbs().maxCoeff()))
        throw NumericError(std::string(what) + " is not symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success)
        throw NumericError(std::string(what) + " is not positive-definite");
    Eigen::MatrixXd l = llt.matrixL();
    if ((l.diagonal().array() <= 0.0).any())
        throw NumericError(std::string(what) + " is not positive-definite");
    return l;
}

}  // namespace

std::string to_string(ProcessKind kind) {
    switch (kind) {
        case ProcessKind::RFF: return "rff";
        case ProcessKind::LinearGaussian: return "linear";
        case ProcessKind::ReLURandomFeature: return "relu";
    }
    return "?";
}

ProcessKind parse_process_kind(const std::string& name) {
    if (name == "rff" || name == "RFF") return ProcessKind::RFF;
    if (name == "linear" || name == "LinearGaussian") return ProcessKind::LinearGaussian;
    if (name == "relu" || name == "ReLURandomFeature") return ProcessKind::ReLURandomFeature;
    throw ConfigError("unknown process kind '" + name + "'");
}

std::string to_string(NoiseKind kind) {
    switch (kind) {
        case NoiseKind::None: return "none";
        case NoiseKind::Independent: return "independent";
        case NoiseKind::RowColumnCorrelated: return "rowcol";
    }
    return "?";
}

NoiseKind parse_noise_kind(const std::string& name) {
    if (name == "none" || name == "None") return NoiseKind::None;
    if (name == "independent" || name == "Independent") return NoiseKind::Independent;
    if (name == "rowcol" || name == "correlated" || name == "RowColumnCorrelated")
        return NoiseKind::RowColumnCorrelated;
    throw ConfigError("unknown noise kind '" + name + "'");
}

GenerativeProcess GenerativeProcess::rff(const Eigen::MatrixXd& sigma_x, const Eigen::MatrixXd& sigma) {
    GenerativeProcess g;
    g.kind_ = ProcessKind::RFF;
    g.sigma_x_ = sigma_x;
    g.sigma_ = sigma;
    g.input_factor_ = checked_cholesky(sigma_x, "sigma_x");
    if (sigma.rows() != sigma_x.rows()) throw NumericError("sigma and sigma_x dimensions differ");
    Eigen::MatrixXd l = checked_cholesky(sigma, "sigma");
    // sigma = L L'  =>  sigma^-1 = L^-T L^-1, so w = L^-T z has covariance sigma^-1.
    g.weight_factor_ = l.transpose().triangularView<Eigen::Upper>().solve(
        Eigen::MatrixXd::Identity(l.rows(), l.cols()));
    return g;
}

GenerativeProcess GenerativeProcess::linear(const Eigen::MatrixXd& sigma_x, double scale) {
    if (!(scale >= 0.0) || !std::isfinite(scale)) throw NumericError("scale must be finite and nonnegative");
    GenerativeProcess g;
    g.kind_ = ProcessKind::LinearGaussian;
    g.sigma_x_ = sigma_x;
    g.input_factor_ = checked_cholesky(sigma_x, "sigma_x");
    g.sigma_ = Eigen::MatrixXd::Identity(sigma_x.rows(), sigma_x.cols());
    g.weight_factor_ = g.sigma_;
    g.scale_ = scale;
    return g;
}

GenerativeProcess GenerativeProcess::relu(const Eigen::MatrixXd& sigma_x) {
    GenerativeProcess g;
    g.kind_ = ProcessKind::ReLURandomFeature;
    g.sigma_x_ = sigma_x;
    g.input_factor_ = checked_cholesky(sigma_x, "sigma_x");
    g.sigma_ = Eigen::MatrixXd::Identity(sigma_x.rows(), sigma_x.cols());
    g.weight_factor_ = g.sigma_;
    return g;
}

namespace {

// Rows of z mapped through the factor: z L'.
Matrix apply_factor(const Matrix& z, const Eigen::MatrixXd& factor) {
    if (factor.isDiagonal(0.0)) return z * factor.diagonal().asDiagonal();
    return z * factor.transpose();
}

}  // namespace

Matrix sample_inputs(const GenerativeProcess& process, Eigen::Index p, std::uint64_t seed) {
    if (p < 1) throw NumericError("sample_inputs: p must be >= 1");
    const int d = process.dim();
    Matrix z(p, d);
    std::normal_distribution<double> normal;
    for (Eigen::Index i = 0; i < p; ++i) {
        auto rng = make_stream(seed, StreamDomain::Inputs, static_cast<std::uint64_t>(i));
        normal.reset();
        for (int k = 0; k < d; ++k) z(i, k) = normal(rng);
    }
    return apply_factor(z, process.input_factor());
}

FeatureSet sample_features(const GenerativeProcess& process, Eigen::Index q, std::uint64_t seed) {
    if (q < 1) throw NumericError("sample_features: q must be >= 1");
    const int d = process.dim();
    FeatureSet f;
    Matrix z(q, d);
    const bool rff = process.kind() == ProcessKind::RFF;
    if (rff) f.phases.resize(q);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    for (Eigen::Index a = 0; a < q; ++a) {
        auto rng = make_stream(seed, StreamDomain::Features, static_cast<std::uint64_t>(a));
        normal.reset();
        for (int k = 0; k < d; ++k) z(a, k) = normal(rng);
        if (rff) {
            double b = phase(rng);
            // uniform_real_distribution may round up to the open endpoint.
            if (b >= 2.0 * std::numbers::pi) b = 0.0;
            f.phases[a] = b;
        }
    }
    f.weights = apply_factor(z, process.weight_factor());
    return f;
}

namespace {

double apply_nonlinearity(const GenerativeProcess& process, double dot, double phase) {
    switch (process.kind()) {
        case ProcessKind::RFF: return std::numbers::sqrt2 * std::sin(dot + phase);
        case ProcessKind::LinearGaussian: return process.scale() * dot;
        case ProcessKind::ReLURandomFeature: return dot > 0.0 ? dot : 0.0;
    }
    return 0.0;
}

}  // namespace

double evaluate_phi(const GenerativeProcess& process, const Eigen::Ref<const Vector>& x,
                    const Eigen::Ref<const Vector>& w, double phase) {
    if (x.size() != process.dim() || w.size() != process.dim())
        throw NumericError("evaluate_phi: dimension mismatch");
    return apply_nonlinearity(process, x.dot(w), phase);
}

Matrix evaluate_matrix(const GenerativeProcess& process, const Matrix& inputs, const FeatureSet& features) {
    if (inputs.cols() != process.dim() || features.weights.cols() != process.dim())
        throw NumericError("evaluate_matrix: dimension mismatch");
    const bool phased = features.phases.size() == features.weights.rows();
    Matrix phi(inputs.rows(), features.weights.rows());
    Vector x(inputs.cols()), w(inputs.cols());
    for (Eigen::Index i = 0; i < phi.rows(); ++i) {
        x = inputs.row(i).transpose();
        for (Eigen::Index a = 0; a < phi.cols(); ++a) {
            w = features.weights.row(a).transpose();
            phi(i, a) = apply_nonlinearity(process, x.dot(w), phased ? features.phases[a] : 0.0);
        }
    }
    return phi;
}

std::vector<MeasurementMatrix> build_measurements(const GenerativeProcess& process, Eigen::Index p,
                                                  Eigen::Index q, const NoiseModel& noise,
                                                  std::uint64_t seed) {
    if (noise.trials < 1) throw NumericError("build_measurements: trials must be >= 1");
    if (!(noise.sigma_noise >= 0.0) || !std::isfinite(noise.sigma_noise))
        throw NumericError("build_measurements: sigma_noise must be finite and nonnegative");
    const Matrix inputs = sample_inputs(process, p, seed);
    const FeatureSet features = sample_features(process, q, seed);
    const Matrix base = evaluate_matrix(process, inputs, features);

    std::vector<MeasurementMatrix> out;
    out.reserve(static_cast<std::size_t>(noise.trials));
    std::normal_distribution<double> normal(0.0, noise.sigma_noise);
    for (int t = 0; t < noise.trials; ++t) {
        MeasurementMatrix m{base, t, seed};
        const auto trial = static_cast<std::uint64_t>(t);
        if (noise.kind == NoiseKind::Independent && noise.sigma_noise > 0.0) {
            for (Eigen::Index i = 0; i < p; ++i) {
                auto rng = make_stream(seed, StreamDomain::NoiseEntry, trial, static_cast<std::uint64_t>(i));
                normal.reset();
                for (Eigen::Index a = 0; a < q; ++a) m.entries(i, a) += normal(rng);
            }
        } else if (noise.kind == NoiseKind::RowColumnCorrelated && noise.sigma_noise > 0.0) {
            Vector row_noise(p), col_noise(q);
            for (Eigen::Index i = 0; i < p; ++i) {
                auto rng = make_stream(seed, StreamDomain::NoiseRow, trial, static_cast<std::uint64_t>(i));
                normal.reset();
                row_noise[i] = normal(rng);
            }
            for (Eigen::Index a = 0; a < q; ++a) {
                auto rng = make_stream(seed, StreamDomain::NoiseColumn, trial, static_cast<std::uint64_t>(a));
                normal.reset();
                col_noise[a] = normal(rng);
            }
            m.entries.colwise() += row_noise;
            m.entries.rowwise() += col_noise.transpose();
        }
        out.push_back(std::move(m));
    }
    return out;
}

}  // namespace kernmoment
