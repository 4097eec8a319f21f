#include "kernmoment/recovery.hpp"

#include "kernmoment/moments_io.hpp"
#include "kernmoment/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace kernmoment {

double default_upper_bound(const MomentSequence& moments, int k) {
    double best = std::numeric_limits<double>::infinity();
    for (int n = 1; n <= k; ++n) {
        if (!moments.has(n)) continue;
        const double m = moments.at(n);
        if (m > 0.0 && std::isfinite(m)) best = std::min(best, std::pow(m, 1.0 / n));
    }
    if (!std::isfinite(best)) throw NumericError("default_upper_bound: no positive moment to bound the spectrum");
    return 1.2 * best;
}

SpectralGrid fit_density(const MomentSequence& moments, const RecoveryConfig& cfg) {
    if (cfg.d < 1) throw ConfigError("recovery: d must be >= 1");
    if (cfg.k < 1) throw ConfigError("recovery: k must be >= 1");
    if (cfg.t_count < cfg.d) throw ConfigError("recovery: grid size T must be >= d");
    for (int n = 1; n <= cfg.k; ++n) {
        if (!moments.has(n))
            throw NumericError("recovery: moment n = " + std::to_string(n) + " missing (k = " + std::to_string(cfg.k) +
                               ")");
        if (!std::isfinite(moments.at(n))) throw NumericError("recovery: non-finite moment at n = " + std::to_string(n));
    }
    SpectralGrid grid;
    grid.b = cfg.b > 0.0 ? cfg.b : default_upper_bound(moments, cfg.k);
    grid.t_count = cfg.t_count;
    const int t = cfg.t_count;
    const int k = cfg.k;
    grid.points.resize(static_cast<std::size_t>(t));
    for (int i = 0; i < t; ++i) grid.points[static_cast<std::size_t>(i)] = grid.b * (i + 1) / t;

    // Columns: p_0..p_{T-1}, u_1..u_k, v_1..v_k. Rows: n = 1..k, then sum p = 1.
    const int vars = t + 2 * k;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(k + 1, vars);
    Eigen::VectorXd rhs(k + 1);
    Eigen::VectorXd cost = Eigen::VectorXd::Zero(vars);
    for (int n = 1; n <= k; ++n) {
        const int r = n - 1;
        for (int i = 0; i < t; ++i) a(r, i) = std::pow(grid.points[static_cast<std::size_t>(i)], n);
        a(r, t + r) = 1.0;
        a(r, t + k + r) = -1.0;
        rhs[r] = moments.at(n) / cfg.d;
        cost[t + r] = 1.0;
        cost[t + k + r] = 1.0;
    }
    a.row(k).head(t).setOnes();
    rhs[k] = 1.0;

    // All mass on s_1, residuals absorbed by whichever slack is nonnegative.
    std::vector<int> basis(static_cast<std::size_t>(k + 1));
    for (int r = 0; r < k; ++r)
        basis[static_cast<std::size_t>(r)] = rhs[r] - a(r, 0) >= 0.0 ? t + r : t + k + r;
    basis[static_cast<std::size_t>(k)] = 0;

    const LpResult lp = simplex_minimize(a, rhs, cost, basis);
    grid.weights.assign(lp.x.data(), lp.x.data() + t);
    grid.objective = lp.objective;
    return grid;
}

EigenvalueList extract_eigenvalues(const SpectralGrid& grid, int d) {
    if (d < 1) throw ConfigError("extract_eigenvalues: d must be >= 1");
    if (grid.points.empty() || grid.points.size() != grid.weights.size())
        throw NumericError("extract_eigenvalues: malformed grid");
    EigenvalueList out;
    std::size_t j = 0;
    long double cumulative = grid.weights[0];
    for (int i = 1; i <= d; ++i) {
        const long double level = static_cast<long double>(i) / (d + 1) - 1e-9L;
        while (cumulative < level && j + 1 < grid.points.size()) cumulative += grid.weights[++j];
        out.values.push_back(grid.points[j]);
    }
    std::sort(out.values.rbegin(), out.values.rend());
    out.rank = static_cast<int>(std::count_if(out.values.begin(), out.values.end(), [](double v) { return v > 0.0; }));
    return out;
}

RecoveryResult recover(const MomentSequence& moments, const RecoveryConfig& cfg) {
    RecoveryResult r;
    r.grid = fit_density(moments, cfg);
    r.eigenvalues = extract_eigenvalues(r.grid, cfg.d);
    return r;
}

EigenvalueList gram_eigenvalues(const Matrix& phi, int count) {
    if (count < 1) throw ConfigError("gram_eigenvalues: count must be >= 1");
    const double scale = 1.0 / (static_cast<double>(phi.rows()) * static_cast<double>(phi.cols()));
    Eigen::MatrixXd g = phi.rows() <= phi.cols() ? Eigen::MatrixXd(phi * phi.transpose())
                                                 : Eigen::MatrixXd(phi.transpose() * phi);
    g *= scale;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericError("gram_eigenvalues: eigensolver failed");
    EigenvalueList out;
    const Eigen::VectorXd& ev = es.eigenvalues();
    for (Eigen::Index i = ev.size() - 1; i >= 0 && static_cast<int>(out.values.size()) < count; --i)
        out.values.push_back(std::max(ev[i], 0.0));
    out.values.resize(static_cast<std::size_t>(count), 0.0);
    out.rank = static_cast<int>(std::count_if(out.values.begin(), out.values.end(), [](double v) { return v > 0.0; }));
    return out;
}

void write_eigenvalue_table(const std::filesystem::path& path, const std::vector<std::string>& names,
                            const std::vector<EigenvalueList>& columns, const std::string& comment) {
    if (names.size() != columns.size()) throw IoError("write_eigenvalue_table: header/column count mismatch");
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    if (!comment.empty()) out << "# " << comment << '\n';
    out << "index";
    std::size_t rows = 0;
    for (std::size_t c = 0; c < names.size(); ++c) {
        out << ',' << names[c];
        rows = std::max(rows, columns[c].values.size());
    }
    out << '\n';
    for (std::size_t r = 0; r < rows; ++r) {
        out << r + 1;
        for (const auto& col : columns) {
            out << ',';
            if (r < col.values.size()) out << format_double(col.values[r]);
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace kernmoment
