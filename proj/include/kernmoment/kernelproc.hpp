#pragma once

#include "kernmoment/common.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace kernmoment {

enum class ProcessKind { RFF, LinearGaussian, ReLURandomFeature };

std::string to_string(ProcessKind kind);
ProcessKind parse_process_kind(const std::string& name);

/// A generative process (phi, rho_X, rho_W) for measurement matrices.
///
///  * RFF: phi(x, (w, b)) = sqrt(2) sin(w'x + b), x ~ N(0, sigma_x),
///    w ~ N(0, sigma^-1), b ~ U[0, 2 pi). The induced kernel is the RBF kernel
///    exp(-(x - y)' sigma^-1 (x - y) / 2).
///  * LinearGaussian: phi(x, w) = scale * x'w, x ~ N(0, sigma_x), w ~ N(0, I).
///  * ReLURandomFeature: phi(x, w) = max(x'w, 0), x ~ N(0, sigma_x), w ~ N(0, I).
///
/// Covariances are validated (and factorised) on construction; an invalid
/// covariance throws NumericError.
class GenerativeProcess {
public:
    static GenerativeProcess rff(const Eigen::MatrixXd& sigma_x, const Eigen::MatrixXd& sigma);
    static GenerativeProcess linear(const Eigen::MatrixXd& sigma_x, double scale);
    static GenerativeProcess relu(const Eigen::MatrixXd& sigma_x);

    ProcessKind kind() const { return kind_; }
    int dim() const { return static_cast<int>(sigma_x_.rows()); }
    const Eigen::MatrixXd& sigma_x() const { return sigma_x_; }
    /// Kernel covariance; meaningful for RFF only (identity otherwise).
    const Eigen::MatrixXd& sigma() const { return sigma_; }
    double scale() const { return scale_; }

    /// Lower Cholesky factor of sigma_x.
    const Eigen::MatrixXd& input_factor() const { return input_factor_; }
    /// Lower Cholesky factor of the feature-weight covariance.
    const Eigen::MatrixXd& weight_factor() const { return weight_factor_; }

private:
    GenerativeProcess() = default;

    ProcessKind kind_ = ProcessKind::RFF;
    Eigen::MatrixXd sigma_x_;
    Eigen::MatrixXd sigma_;
    double scale_ = 1.0;
    Eigen::MatrixXd input_factor_;
    Eigen::MatrixXd weight_factor_;
};

/// Sampled features. `phases` is empty for processes without a phase shift.
struct FeatureSet {
    Matrix weights;  // q x d
    Vector phases;   // q (RFF only)

    Eigen::Index size() const { return weights.rows(); }
};

enum class NoiseKind { None, Independent, RowColumnCorrelated };

std::string to_string(NoiseKind kind);
NoiseKind parse_noise_kind(const std::string& name);

struct NoiseModel {
    NoiseKind kind = NoiseKind::None;
    double sigma_noise = 0.0;
    int trials = 1;
};

struct MeasurementMatrix {
    Matrix entries;
    int trial_id = 0;
    std::uint64_t seed = 0;

    Eigen::Index p() const { return entries.rows(); }
    Eigen::Index q() const { return entries.cols(); }
};

/// p rows x_i ~ N(0, sigma_x), one d-vector per row. Row i depends only on (seed, i).
Matrix sample_inputs(const GenerativeProcess& process, Eigen::Index p, std::uint64_t seed);

/// q features; feature alpha depends only on (seed, alpha).
FeatureSet sample_features(const GenerativeProcess& process, Eigen::Index q, std::uint64_t seed);

/// phi(x, (w, b)). `phase` is ignored for processes without one.
double evaluate_phi(const GenerativeProcess& process, const Eigen::Ref<const Vector>& x,
                    const Eigen::Ref<const Vector>& w, double phase = 0.0);

/// Phi_{i alpha} = phi(x_i, w_alpha) for all rows of `inputs` and all features.
Matrix evaluate_matrix(const GenerativeProcess& process, const Matrix& inputs,
                       const FeatureSet& features);

/// Samples one set of inputs and features, evaluates the noiseless matrix
/// once, and returns one noisy copy per trial. All trials share the same
/// (x_i, w_alpha).
std::vector<MeasurementMatrix> build_measurements(const GenerativeProcess& process, Eigen::Index p,
                                                  Eigen::Index q, const NoiseModel& noise,
                                                  std::uint64_t seed);

}  // namespace kernmoment
