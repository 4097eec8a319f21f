#include "kmcli/commands.hpp"

#include "kmcli/experiments.hpp"

#include "kernmoment/analytic.hpp"
#include "kernmoment/matrix_io.hpp"
#include "kernmoment/moments_io.hpp"
#include "kernmoment/parallel.hpp"
#include "kernmoment/recovery.hpp"

#include "CLI11.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>

namespace kmcli {

namespace fs = std::filesystem;
using kernmoment::ConfigError;
using kernmoment::EigenvalueList;
using kernmoment::IoError;
using kernmoment::NumericError;

namespace {

std::uint64_t seed_of(const json& cfg) { return get_or<std::uint64_t>(cfg, "seed", 1); }

std::string stamp(const json& cfg) { return "config_hash=" + config_hash(cfg) + " seed=" + std::to_string(seed_of(cfg)); }

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

std::ofstream open_csv(const fs::path& path, const json& cfg, const std::string& header) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "# " << stamp(cfg) << '\n' << header << '\n';
    return out;
}

std::string num(double v) { return std::isnan(v) ? "" : kernmoment::format_double(v); }

kernmoment::DpOptions dp_options(const json& cfg, unsigned threads) {
    return {parse_orientation(get_or<std::string>(cfg, "orientation", "auto")), threads};
}

EstimatorSettings estimator_settings(const json& cfg, unsigned threads) {
    EstimatorSettings s;
    s.dp = dp_options(cfg, threads);
    s.repeats = get_or<int>(cfg, "repeats", 1);
    if (s.repeats < 1) throw ConfigError("repeats must be >= 1");
    s.seed = seed_of(cfg);
    s.kv.center = get_or<bool>(cfg, "kv_center", false);
    return s;
}

struct LoadedMatrices {
    std::vector<kernmoment::Matrix> trials;
    std::optional<json> process;
};

LoadedMatrices load_matrices(const json& cfg, const fs::path& out_dir) {
    LoadedMatrices loaded;
    std::vector<fs::path> files;
    if (cfg.contains("matrices")) {
        for (const auto& f : require<std::vector<std::string>>(cfg, "matrices")) files.emplace_back(f);
    } else {
        const fs::path manifest_path = get_or<std::string>(cfg, "manifest", (out_dir / "manifest.json").string());
        std::ifstream in(manifest_path);
        if (!in) throw IoError("no matrices: set 'matrices' or provide manifest " + manifest_path.string());
        json manifest;
        try {
            manifest = json::parse(in);
        } catch (const json::parse_error& e) {
            throw IoError("manifest " + manifest_path.string() + ": " + e.what());
        }
        for (const auto& f : manifest.at("files")) files.push_back(manifest_path.parent_path() / f.get<std::string>());
        if (manifest.contains("process")) loaded.process = manifest.at("process");
    }
    if (files.empty()) throw ConfigError("no matrix files listed");
    for (const auto& f : files) loaded.trials.push_back(kernmoment::read_matrix(f));
    for (const auto& m : loaded.trials)
        if (m.rows() != loaded.trials[0].rows() || m.cols() != loaded.trials[0].cols())
            throw NumericError("trial matrices differ in shape");
    if (cfg.contains("process")) loaded.process = cfg.at("process");
    return loaded;
}

std::vector<kernmoment::EstimatorKind> estimators_of(const json& cfg, std::vector<kernmoment::EstimatorKind> fallback) {
    return cfg.contains("estimators") ? parse_estimator_list(cfg.at("estimators")) : fallback;
}

json moments_json(const std::vector<MomentSequence>& seqs) {
    json arr = json::array();
    for (const auto& m : seqs) {
        json values = json::object();
        for (const auto& [n, v] : m.values) values[std::to_string(n)] = v;
        arr.push_back({{"estimator", kernmoment::to_string(m.estimator)},
                       {"n_max", m.n_max},
                       {"values", values},
                       {"wall_seconds", m.wall_seconds}});
    }
    return arr;
}

EigenvalueList truth_eigenvalues(const kernmoment::GenerativeProcess& process, int d) {
    if (process.kind() == kernmoment::ProcessKind::RFF)
        return kernmoment::rbf_top_eigenvalues(kernmoment::make_rbf_spec(process.sigma_x(), process.sigma()), d);
    if (process.kind() == kernmoment::ProcessKind::LinearGaussian) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(process.sigma_x(), Eigen::EigenvaluesOnly);
        EigenvalueList out;
        for (Eigen::Index i = es.eigenvalues().size() - 1; i >= 0; --i)
            out.values.push_back(es.eigenvalues()[i] * process.scale() * process.scale());
        out.values.resize(static_cast<std::size_t>(d), 0.0);
        out.rank = static_cast<int>(std::count_if(out.values.begin(), out.values.end(), [](double v) { return v > 0; }));
        return out;
    }
    throw NumericError("no closed-form spectrum for process " + kernmoment::to_string(process.kind()));
}

kernmoment::RecoveryConfig recovery_config(const json& j, int k_default) {
    kernmoment::RecoveryConfig rc;
    rc.d = require<int>(j, "d");
    rc.b = get_or<double>(j, "b", 0.0);
    rc.t_count = get_or<int>(j, "t_count", 200);
    rc.k = get_or<int>(j, "k", k_default);
    return rc;
}

json recovery_config_json(const kernmoment::RecoveryConfig& rc) {
    return {{"d", rc.d}, {"b", rc.b}, {"t_count", rc.t_count}, {"k", rc.k}};
}

// ---- reproduce ----------------------------------------------------------

struct FigureContext {
    json cfg;
    fs::path out;
    double scale = 1.0;
    std::uint64_t seed = 1;
    unsigned threads = 0;
    EstimatorSettings settings;

    int replicates(int at_full_scale) const {
        const int r = get_or<int>(cfg, "replicates", 0);
        if (r > 0) return r;
        return std::max(10, static_cast<int>(std::lround(at_full_scale * scale)));
    }
    Eigen::Index dim(double full, Eigen::Index floor) const {
        return std::max<Eigen::Index>(floor, std::lround(full * scale));
    }
};

void write_summary_rows(std::ofstream& out, const std::string& prefix, const ReplicateResult& res) {
    for (auto kind : res.estimators)
        for (int n = 1; n <= res.n_max; ++n) {
            const Summary s = res.summary(kind, n);
            out << prefix << kernmoment::to_string(kind) << ',' << n << ',' << num(s.mean) << ',' << num(s.truth) << ','
                << num(s.mse) << ',' << num(s.bias) << ',' << num(s.variance) << ',' << num(s.se) << ','
                << num(s.ci_low) << ',' << num(s.ci_high) << ',' << num(s.z()) << ',' << s.count << '\n';
        }
}

const char* kSummaryHeader = "estimator,n,mean,truth,mse,bias,variance,se,ci25,ci75,z,replicates";

void figure_fig2(const FigureContext& ctx) {
    using kernmoment::EstimatorKind;
    const std::vector<EstimatorKind> ests{EstimatorKind::Naive, EstimatorKind::KVRow, EstimatorKind::KVCol,
                                          EstimatorKind::DP};
    const Eigen::Index p = ctx.dim(300, 8), q = ctx.dim(600, 8);
    const int n_max = static_cast<int>(std::min<Eigen::Index>({7, p, q}));
    ReplicateSpec spec{fig2_process(), p, q, n_max, {}, ests, ctx.replicates(100), ctx.seed, ctx.settings, ctx.threads};
    const ReplicateResult res = run_replicates(spec);
    {
        auto out = open_csv(ctx.out / "fig2_moments.csv", ctx.cfg, kSummaryHeader);
        write_summary_rows(out, "", res);
    }
    {
        // m(n)^{1/n} from the replicate means against the top eigenvalue.
        const double top = kernmoment::rbf_top_eigenvalues(
                               kernmoment::make_rbf_spec(fig2_process().sigma_x(), fig2_process().sigma()), 1)
                               .values[0];
        auto out = open_csv(ctx.out / "fig2_norm.csv", ctx.cfg, "estimator,n,root_of_mean,top_eigenvalue");
        for (auto kind : ests)
            for (int n = 1; n <= n_max; ++n) {
                const double m = res.summary(kind, n).mean;
                out << kernmoment::to_string(kind) << ',' << n << ',' << num(m > 0 ? std::pow(m, 1.0 / n) : kNoTruth)
                    << ',' << num(top) << '\n';
            }
        for (int n = 1; n <= n_max; ++n)
            out << "analytic," << n << ',' << num(std::pow(res.truth_at(n), 1.0 / n)) << ',' << num(top) << '\n';
    }
    auto out = open_csv(ctx.out / "fig2_qsweep.csv", ctx.cfg, std::string("q,") + kSummaryHeader);
    for (double qf : {150.0, 300.0, 600.0, 1200.0}) {
        const Eigen::Index qs = ctx.dim(qf, 4);
        ReplicateSpec sweep{fig2_process(), p, qs, 3, {}, ests, ctx.replicates(100), ctx.seed, ctx.settings, ctx.threads};
        write_summary_rows(out, std::to_string(qs) + ",", run_replicates(sweep));
    }
    std::cout << "fig2: P=" << p << " Q=" << q << " replicates=" << spec.replicates << '\n';
}

void figure_recovery(const FigureContext& ctx, const std::string& name, const kernmoment::GenerativeProcess& process,
                     Eigen::Index p, Eigen::Index q, const kernmoment::RecoveryConfig& rc) {
    const int reps = ctx.replicates(20);
    const std::vector<double> truth = truth_eigenvalues(process, rc.d).values;
    std::vector<RecoveryComparison> runs(static_cast<std::size_t>(reps));
    kernmoment::parallel_for(
        runs.size(),
        [&](std::size_t r) {
            const auto m = kernmoment::build_measurements(process, p, q, {}, replicate_seed(ctx.seed, static_cast<int>(r)));
            runs[r] = compare_recovery(m[0].entries, rc, truth, ctx.settings);
        },
        ctx.threads);
    {
        auto out = open_csv(ctx.out / (name + "_errors.csv"), ctx.cfg, "replicate,ours,kv,svd,ours_objective,kv_objective");
        for (std::size_t r = 0; r < runs.size(); ++r)
            out << r << ',' << num(runs[r].ours_error) << ',' << num(runs[r].kv_error) << ',' << num(runs[r].svd_error)
                << ',' << num(runs[r].ours_objective) << ',' << num(runs[r].kv_objective) << '\n';
    }
    // Per-index medians across replicates.
    auto column = [&](auto pick) {
        EigenvalueList col;
        for (int i = 0; i < rc.d; ++i) {
            std::vector<double> xs;
            for (const auto& run : runs) xs.push_back(pick(run).values[static_cast<std::size_t>(i)]);
            col.values.push_back(quantile(xs, 0.5));
        }
        return col;
    };
    EigenvalueList gt{truth, rc.d};
    kernmoment::write_eigenvalue_table(
        ctx.out / (name + "_eigenvalues.csv"), {"GT", "SVD", "KV", "Ours"},
        {gt, column([](const RecoveryComparison& c) -> const EigenvalueList& { return c.svd; }),
         column([](const RecoveryComparison& c) -> const EigenvalueList& { return c.kv; }),
         column([](const RecoveryComparison& c) -> const EigenvalueList& { return c.ours; })},
        stamp(ctx.cfg));
    std::vector<double> ours, kv, svd;
    for (const auto& run : runs) {
        ours.push_back(run.ours_error);
        kv.push_back(run.kv_error);
        svd.push_back(run.svd_error);
    }
    write_json(ctx.out / (name + "_summary.json"),
               {{"config_hash", config_hash(ctx.cfg)},
                {"seed", ctx.seed},
                {"p", p},
                {"q", q},
                {"replicates", reps},
                {"recovery", recovery_config_json(rc)},
                {"median_total_abs_error", {{"ours", quantile(ours, 0.5)}, {"kv", quantile(kv, 0.5)}, {"svd", quantile(svd, 0.5)}}}});
    std::cout << name << ": median total |error| ours=" << quantile(ours, 0.5) << " kv=" << quantile(kv, 0.5)
              << " svd=" << quantile(svd, 0.5) << '\n';
}

void figure_fig3left(const FigureContext& ctx) {
    const auto process = kernmoment::GenerativeProcess::linear(Eigen::MatrixXd::Identity(20, 20), std::sqrt(0.3));
    const Eigen::Index n = ctx.dim(100, 20);
    figure_recovery(ctx, "fig3left", process, n, n, {20, 1.0, 200, 10});
}

void figure_fig3right(const FigureContext& ctx) {
    const auto process = kernmoment::GenerativeProcess::rff(Eigen::MatrixXd::Identity(1, 1),
                                                             Eigen::MatrixXd::Constant(1, 1, 1.0 / 400.0));
    const Eigen::Index n = ctx.dim(20, 10);
    figure_recovery(ctx, "fig3right", process, n, n, {static_cast<int>(n), 0.0, 200, 10});
}

void figure_noise_table(const FigureContext& ctx) {
    using kernmoment::EstimatorKind;
    using kernmoment::NoiseKind;
    const auto process = kernmoment::GenerativeProcess::rff(Eigen::MatrixXd::Identity(3, 3),
                                                            0.25 * Eigen::MatrixXd::Identity(3, 3));
    const Eigen::Index p = ctx.dim(75, 8), q = ctx.dim(15, 5);
    const double sigma = get_or<double>(ctx.cfg, "sigma_noise", 1.0);
    const std::vector<EstimatorKind> base{EstimatorKind::Naive, EstimatorKind::KVRow, EstimatorKind::KVCol,
                                          EstimatorKind::DP};
    struct Condition {
        const char* name;
        kernmoment::NoiseModel noise;
        std::vector<EstimatorKind> ests;
    };
    std::vector<Condition> conditions{
        {"none", {NoiseKind::None, 0.0, 1}, base},
        {"independent", {NoiseKind::Independent, sigma, 1}, base},
        {"rowcol", {NoiseKind::RowColumnCorrelated, sigma, 2}, base},
    };
    conditions.back().ests.push_back(EstimatorKind::DPAlt2);
    auto out = open_csv(ctx.out / "noise_table.csv", ctx.cfg, std::string("condition,") + kSummaryHeader);
    for (const auto& c : conditions) {
        ReplicateSpec spec{process, p, q, 4, c.noise, c.ests, ctx.replicates(200), ctx.seed, ctx.settings, ctx.threads};
        write_summary_rows(out, std::string(c.name) + ",", run_replicates(spec));
    }
    std::cout << "noise_table: P=" << p << " Q=" << q << " sigma_noise=" << sigma << '\n';
}

}  // namespace

json effective_config(const CliOptions& opts) {
    json cfg = opts.config ? load_config(*opts.config) : json::object();
    if (opts.seed) cfg["seed"] = *opts.seed;
    if (!cfg.contains("seed")) cfg["seed"] = 1;
    if (opts.scale) cfg["scale"] = *opts.scale;
    if (opts.estimators) cfg["estimators"] = *opts.estimators;
    if (opts.orientation) cfg["orientation"] = *opts.orientation;
    if (opts.repeats) cfg["repeats"] = *opts.repeats;
    if (opts.figure) cfg["figure"] = *opts.figure;
    if (opts.replicates) cfg["replicates"] = *opts.replicates;
    return cfg;
}

void cmd_generate(const CliOptions& opts) {
    const json cfg = effective_config(opts);
    const auto process = parse_process(require<json>(cfg, "process"));
    const auto p = require<std::int64_t>(cfg, "p");
    const auto q = require<std::int64_t>(cfg, "q");
    if (p < 1 || q < 1) throw ConfigError("p and q must be >= 1");
    const auto noise = parse_noise(cfg.contains("noise") ? cfg.at("noise") : json());
    const std::string format = get_or<std::string>(cfg, "format", "csv");
    if (format != "csv" && format != "bin") throw ConfigError("format must be 'csv' or 'bin'");
    const std::uint64_t seed = seed_of(cfg);

    const auto ms = kernmoment::build_measurements(process, p, q, noise, seed);
    ensure_dir(opts.out);
    json files = json::array();
    for (const auto& m : ms) {
        const std::string name = "phi_t" + std::to_string(m.trial_id) + "." + format;
        kernmoment::write_matrix(opts.out / name, m.entries);
        files.push_back(name);
    }
    write_json(opts.out / "manifest.json",
               {{"config", cfg},
                {"config_hash", config_hash(cfg)},
                {"seed", seed},
                {"p", p},
                {"q", q},
                {"trials", noise.trials},
                {"process", process_to_json(process)},
                {"noise", {{"kind", kernmoment::to_string(noise.kind)}, {"sigma", noise.sigma_noise}}},
                {"files", files}});
    std::cout << "wrote " << files.size() << " matrix file(s) of " << p << "x" << q << " to " << opts.out.string() << '\n';
}

void cmd_estimate(const CliOptions& opts) {
    using kernmoment::EstimatorKind;
    const json cfg = effective_config(opts);
    const LoadedMatrices loaded = load_matrices(cfg, opts.out);
    const auto& phi = loaded.trials[0];
    const int side = static_cast<int>(std::min(phi.rows(), phi.cols()));
    const int n_max = get_or<int>(cfg, "n_max", std::min(7, side));
    std::vector<EstimatorKind> fallback{EstimatorKind::Naive, EstimatorKind::KVRow, EstimatorKind::KVCol,
                                        EstimatorKind::DP};
    if (loaded.trials.size() >= 2) fallback.push_back(EstimatorKind::DPAlt2);
    const auto ests = estimators_of(cfg, fallback);
    const EstimatorSettings settings = estimator_settings(cfg, opts.threads);

    std::vector<MomentSequence> seqs;
    for (auto kind : ests) {
        if (kind == EstimatorKind::DPAlt2 && loaded.trials.size() > 2) kind = EstimatorKind::DPAltT;
        MomentSequence m = run_estimator(kind, loaded.trials, n_max, settings);
        m.meta.seed = seed_of(cfg);
        m.meta.trials = static_cast<int>(loaded.trials.size());
        seqs.push_back(std::move(m));
    }
    if (loaded.process) {
        if (auto truth = ground_truth(parse_process(*loaded.process), n_max)) seqs.push_back(*truth);
    }
    ensure_dir(opts.out);
    kernmoment::write_moments_csv(opts.out / "moments.csv", seqs, stamp(cfg));
    write_json(opts.out / "moments.json", {{"config_hash", config_hash(cfg)},
                                           {"seed", seed_of(cfg)},
                                           {"p", phi.rows()},
                                           {"q", phi.cols()},
                                           {"trials", loaded.trials.size()},
                                           {"n_max", n_max},
                                           {"moments", moments_json(seqs)}});
    for (const auto& m : seqs)
        std::cout << kernmoment::to_string(m.estimator) << ": " << m.wall_seconds << " s\n";
}

void cmd_recover(const CliOptions& opts) {
    const json cfg = effective_config(opts);
    const fs::path moments_path = get_or<std::string>(cfg, "moments", (opts.out / "moments.csv").string());
    const auto seqs = kernmoment::read_moments_csv(moments_path);
    int available = 0;
    for (const auto& m : seqs) available = std::max(available, m.n_max);
    const kernmoment::RecoveryConfig rc = recovery_config(require<json>(cfg, "recovery"), available);

    std::vector<std::string> names;
    std::vector<EigenvalueList> columns;
    std::optional<json> process_json = cfg.contains("process") ? std::optional<json>(cfg.at("process")) : std::nullopt;
    std::optional<kernmoment::Matrix> phi;
    if (cfg.contains("matrix")) {
        phi = kernmoment::read_matrix(require<std::string>(cfg, "matrix"));
    } else if (cfg.contains("manifest") || fs::exists(opts.out / "manifest.json")) {
        const LoadedMatrices loaded = load_matrices(cfg, opts.out);
        phi = loaded.trials[0];
        if (!process_json) process_json = loaded.process;
    }
    if (process_json) {
        const auto process = parse_process(*process_json);
        if (process.kind() != kernmoment::ProcessKind::ReLURandomFeature) {
            names.push_back("GT");
            columns.push_back(truth_eigenvalues(process, rc.d));
        }
    }
    if (phi) {
        names.push_back("SVD");
        columns.push_back(kernmoment::gram_eigenvalues(*phi, rc.d));
    }
    std::vector<kernmoment::EstimatorKind> wanted;
    if (cfg.contains("estimators")) wanted = parse_estimator_list(cfg.at("estimators"));
    json results = json::array();
    for (const auto& m : seqs) {
        if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), m.estimator) == wanted.end()) continue;
        if (m.estimator == kernmoment::EstimatorKind::ExactN2 && rc.k > 2) continue;
        const auto r = kernmoment::recover(m, rc);
        names.push_back(kernmoment::to_string(m.estimator));
        columns.push_back(r.eigenvalues);
        results.push_back({{"estimator", kernmoment::to_string(m.estimator)},
                           {"objective", r.grid.objective},
                           {"b", r.grid.b},
                           {"eigenvalues", r.eigenvalues.values}});
    }
    if (results.empty()) throw NumericError("no moment sequence in " + moments_path.string() + " matched the selection");
    ensure_dir(opts.out);
    kernmoment::write_eigenvalue_table(opts.out / "eigenvalues.csv", names, columns, stamp(cfg));
    write_json(opts.out / "recovery.json", {{"config_hash", config_hash(cfg)},
                                            {"seed", seed_of(cfg)},
                                            {"recovery", recovery_config_json(rc)},
                                            {"results", results}});
    for (const auto& r : results) std::cout << r["estimator"].get<std::string>() << ": objective " << r["objective"] << '\n';
}

void cmd_bench(const CliOptions& opts) {
    const json cfg = effective_config(opts);
    const json b = cfg.contains("bench") ? cfg.at("bench") : json::object();
    BenchSpec spec;
    spec.p_grid = get_or<std::vector<Eigen::Index>>(b, "p_grid", spec.p_grid);
    spec.q_for_p = get_or<Eigen::Index>(b, "q_for_p", spec.q_for_p);
    spec.n_for_p = get_or<int>(b, "n_for_p", spec.n_for_p);
    spec.n_grid = get_or<std::vector<int>>(b, "n_grid", spec.n_grid);
    spec.p_for_n = get_or<Eigen::Index>(b, "p_for_n", spec.p_for_n);
    spec.q_for_n = get_or<Eigen::Index>(b, "q_for_n", spec.q_for_n);
    spec.p_for_orientation = get_or<Eigen::Index>(b, "p_for_orientation", spec.p_for_orientation);
    spec.timing_repeats = get_or<int>(b, "timing_repeats", spec.timing_repeats);
    spec.seed = seed_of(cfg);
    const double scale = get_or<double>(cfg, "scale", 1.0);
    if (!(scale > 0.0 && scale <= 1.0)) throw ConfigError("scale must lie in (0, 1]");
    auto shrink = [&](Eigen::Index v) { return std::max<Eigen::Index>(8, std::lround(static_cast<double>(v) * scale)); };
    for (auto& p : spec.p_grid) p = shrink(p);
    spec.q_for_p = shrink(spec.q_for_p);
    spec.p_for_n = shrink(spec.p_for_n);
    spec.q_for_n = shrink(spec.q_for_n);
    spec.p_for_orientation = shrink(spec.p_for_orientation);

    const BenchResult res = run_bench(spec);
    ensure_dir(opts.out);
    {
        auto out = open_csv(opts.out / "bench.csv", cfg, "sweep,p,q,n,orientation,seconds");
        for (const auto& pt : res.points)
            out << pt.sweep << ',' << pt.p << ',' << pt.q << ',' << pt.n << ','
                << (pt.orientation == kernmoment::Orientation::Transposed ? "transposed" : "asis") << ','
                << num(pt.seconds) << '\n';
    }
    write_json(opts.out / "bench.json", {{"config_hash", config_hash(cfg)},
                                         {"seed", spec.seed},
                                         {"p_exponent", res.p_exponent},
                                         {"n_exponent", res.n_exponent},
                                         {"asis_seconds", res.asis_seconds},
                                         {"transposed_seconds", res.transposed_seconds}});
    std::cout << "P exponent " << res.p_exponent << ", n exponent " << res.n_exponent << ", Q=4P as-is "
              << res.asis_seconds << " s vs transposed " << res.transposed_seconds << " s\n";
}

void cmd_reproduce(const CliOptions& opts) {
    FigureContext ctx;
    ctx.cfg = effective_config(opts);
    ctx.out = opts.out;
    ctx.scale = get_or<double>(ctx.cfg, "scale", 1.0);
    if (!(ctx.scale > 0.0 && ctx.scale <= 1.0)) throw ConfigError("scale must lie in (0, 1]");
    ctx.seed = seed_of(ctx.cfg);
    ctx.threads = opts.threads;
    ctx.settings = estimator_settings(ctx.cfg, 1);
    const std::string figure = require<std::string>(ctx.cfg, "figure");
    ensure_dir(ctx.out);
    if (figure == "fig2") return figure_fig2(ctx);
    if (figure == "fig3left") return figure_fig3left(ctx);
    if (figure == "fig3right") return figure_fig3right(ctx);
    if (figure == "noise_table") return figure_noise_table(ctx);
    throw ConfigError("unknown figure '" + figure + "' (expected fig2, fig3left, fig3right or noise_table)");
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"Spectral moments of kernel integral operators"};
    app.require_subcommand(1);
    CliOptions opts;
    std::string config, out = "out";
    std::uint64_t seed = 0;
    double scale = 1.0;
    std::string estimators, orientation, figure;
    int repeats = 1, replicates = 0;

    struct Entry {
        const char* name;
        const char* help;
        void (*run)(const CliOptions&);
    };
    const Entry entries[] = {
        {"generate", "sample measurement matrices", cmd_generate},
        {"estimate", "estimate spectral moments from matrices", cmd_estimate},
        {"recover", "recover eigenvalues from moments", cmd_recover},
        {"bench", "time the dynamic program", cmd_bench},
        {"reproduce", "run a figure experiment", cmd_reproduce},
    };
    std::vector<CLI::App*> subs;
    for (const auto& e : entries) {
        CLI::App* sub = app.add_subcommand(e.name, e.help);
        auto* c = sub->add_option("--config", config, "JSON config file");
        if (std::string(e.name) != "bench" && std::string(e.name) != "reproduce") c->required();
        sub->add_option("--seed", seed, "random seed");
        sub->add_option("--out", out, "output directory");
        sub->add_option("--scale", scale, "dimension scale in (0, 1]");
        sub->add_option("--estimators", estimators, "comma-separated estimator tags");
        sub->add_option("--orientation", orientation, "auto|asis|transposed");
        sub->add_option("--repeats", repeats, "permutation repeats for dp");
        sub->add_option("--replicates", replicates, "Monte-Carlo replicates");
        sub->add_option("--threads", opts.threads, "worker threads (0 = all cores)");
        if (std::string(e.name) == "reproduce") sub->add_option("--figure", figure, "fig2|fig3left|fig3right|noise_table");
        subs.push_back(sub);
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    for (std::size_t i = 0; i < subs.size(); ++i) {
        CLI::App* sub = subs[i];
        if (!sub->parsed()) continue;
        opts.command = entries[i].name;
        if (sub->count("--config")) opts.config = config;
        if (sub->count("--seed")) opts.seed = seed;
        opts.out = out;
        if (sub->count("--scale")) opts.scale = scale;
        if (sub->count("--estimators")) opts.estimators = estimators;
        if (sub->count("--orientation")) opts.orientation = orientation;
        if (sub->count("--repeats")) opts.repeats = repeats;
        if (sub->count("--replicates")) opts.replicates = replicates;
        if (opts.command == "reproduce" && sub->count("--figure")) opts.figure = figure;
        try {
            entries[i].run(opts);
            return 0;
        } catch (const ConfigError& e) {
            std::cerr << "config error: " << e.what() << '\n';
            return 2;
        } catch (const NumericError& e) {
            std::cerr << "numeric error: " << e.what() << '\n';
            return 3;
        } catch (const IoError& e) {
            std::cerr << "I/O error: " << e.what() << '\n';
            return 4;
        } catch (const json::exception& e) {
            std::cerr << "config error: " << e.what() << '\n';
            return 2;
        }
    }
    return 2;
}

}  // namespace kmcli
