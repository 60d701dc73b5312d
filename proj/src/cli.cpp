#include "qtc/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "qtc/io.hpp"
#include "qtc/lrl.hpp"
#include "qtc/metrics.hpp"
#include "qtc/solvers.hpp"
#include "qtc/synth.hpp"

namespace qtc {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct SynthOpts {
    std::string kind = "planted";
    std::vector<Index> dims{20, 20, 20};
    std::vector<Index> ranks{2, 2, 2};
    double rho = 0.9;
    double gamma = 0.05;
    std::optional<double> amplitude;
    std::uint64_t seed = 1;
    std::string out;
};

struct CompleteOpts {
    std::string input, mask, out, reference;
    std::optional<double> rho;
    std::uint64_t mask_seed = 1;
    double gamma = 0.0;
    std::optional<double> amplitude;
    std::uint64_t noise_seed = 2;
    std::string solver = "rqtc";
    std::optional<double> mu, lambda;
    std::string lambda_rule = "squared";
    std::vector<double> alpha, beta;
    double tol = 1e-4;
    int max_iter = 500;
    std::string scheme = "split";
    std::string svt = "soft";
    std::vector<Index> window{32, 32}, patch{8, 8};
    std::optional<Index> stride, retained_dims;
    Index exemplars = 4;
    double energy = 0.9;
    std::vector<double> slice_weights{0.0, 0.0, 1.0};
    bool no_frames = false;
};

struct EvalOpts {
    std::string ref, rec, json_out;
};

struct DiagOpts {
    std::string input;
    double delta = 1e-8;
};

QTensor load_any(const std::string& path) {
    return fs::is_directory(path) ? load_frames(path) : read_qtensor(path);
}

json quality_json(const QualityReport& q) {
    auto finite_or_null = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    json per = json::array();
    for (std::size_t f = 0; f < q.psnr.size(); ++f)
        per.push_back({{"psnr", finite_or_null(q.psnr[f])}, {"ssim", q.ssim[f]}});
    return {{"mean_psnr", finite_or_null(q.mean_psnr)}, {"mean_ssim", q.mean_ssim}, {"rel_error", q.rel_error},
            {"frames", per}};
}

json stats_json(const SolveStats& st) {
    json h = json::array();
    for (const Residual& r : st.residual_history) h.push_back({r.low_rank, r.sparse, r.feasibility});
    return {{"iters", st.iters},   {"converged", st.converged}, {"lambda", st.lambda},
            {"mu", st.mu},         {"residual_history", h}};
}

void write_json(const fs::path& p, const json& j) {
    std::ofstream f(p);
    if (!f) throw std::runtime_error(p.string() + ": cannot open for writing");
    f << j.dump(2) << '\n';
}

bool frames_compatible(const QTensor& t) { return t.order() == 2 || t.order() == 3; }

int cmd_synth(const SynthOpts& o, std::ostream& out) {
    PlantedProblem p;
    if (o.kind == "planted") {
        p = make_planted(o.dims, o.ranks, o.rho, o.gamma, o.seed, o.amplitude);
    } else if (o.kind == "video") {
        if (o.dims.size() != 3) throw std::invalid_argument("synth: video needs --dims rows,cols,frames");
        p = make_video_problem(o.dims[0], o.dims[1], o.dims[2], o.rho, o.gamma, o.seed, o.amplitude.value_or(255.0));
    } else {
        throw std::invalid_argument("synth: --kind must be planted or video");
    }
    const fs::path dir(o.out);
    fs::create_directories(dir);
    write_qtensor(dir / "L0.qten", p.L0);
    write_qtensor(dir / "S0.qten", p.S0);
    write_qtensor(dir / "X.qten", p.X);
    write_mask(dir / "mask.qmsk", p.mask);
    if (o.kind == "video") {
        save_frames(p.L0, dir / "truth");
        save_frames(p.X, dir / "observed");
    }
    out << "wrote " << o.kind << " problem to " << dir.string() << " (rho " << p.mask.rho() << ")\n";
    return 0;
}

SolveParams solve_params(const CompleteOpts& o) {
    SolveParams sp;
    sp.mu = o.mu;
    sp.beta = o.beta;
    sp.lambda = o.lambda;
    if (o.lambda_rule == "squared") sp.lambda_rule = LambdaRule::squared;
    else if (o.lambda_rule == "linear") sp.lambda_rule = LambdaRule::linear;
    else throw std::invalid_argument("--lambda-rule must be squared or linear");
    if (!o.alpha.empty()) sp.alpha = WeightVec(o.alpha);
    sp.tol = o.tol;
    sp.max_iter = o.max_iter;
    if (o.svt == "soft") sp.svt = Threshold::soft;
    else if (o.svt == "hard") sp.svt = Threshold::hard;
    else throw std::invalid_argument("--svt must be soft or hard");
    if (o.scheme == "split") sp.scheme = RqtcScheme::split;
    else if (o.scheme == "listing") sp.scheme = RqtcScheme::listing;
    else throw std::invalid_argument("--scheme must be split or listing");
    return sp;
}

PatchConfig patch_config(const CompleteOpts& o) {
    if (o.window.size() != 2 || o.patch.size() != 2)
        throw std::invalid_argument("--window and --patch take two values (rows,cols)");
    PatchConfig c;
    c.window_rows = o.window[0];
    c.window_cols = o.window[1];
    c.patch_rows = o.patch[0];
    c.patch_cols = o.patch[1];
    c.stride = o.stride;
    c.num_exemplars = o.exemplars;
    c.retained_dims = o.retained_dims;
    c.energy = o.energy;
    c.slice_weights = WeightVec(o.slice_weights);
    c.validate();
    return c;
}

int cmd_complete(const CompleteOpts& o, std::ostream& out, std::ostream& err) {
    QTensor x = load_any(o.input);
    ObsMask mask;
    if (!o.mask.empty()) {
        if (o.rho) throw std::invalid_argument("complete: give either --mask or --rho, not both");
        mask = read_mask(o.mask);
        if (mask.dims() != x.dims()) throw std::invalid_argument("complete: mask and input shapes differ");
    } else if (o.rho) {
        mask = gen_mask(x.dims(), *o.rho, o.mask_seed);
    } else {
        mask = ObsMask::full(x.dims());
    }
    x = sample(x, mask);
    if (o.gamma > 0.0) {
        const double amp = o.amplitude.value_or(x.max_abs());
        x = sample(x + gen_sparse(x.dims(), o.gamma, amp, o.noise_seed, mask), mask);
    }

    const SolveParams sp = solve_params(o);
    json rep = {{"solver", o.solver}, {"dims", x.dims()}, {"rho", mask.rho()}, {"tol", sp.tol}, {"max_iter", sp.max_iter}};
    QTensor l, s;
    SolveStats stats;
    const auto t0 = std::chrono::steady_clock::now();
    if (o.solver == "qmc") {
        // The matrix solver runs on the mode-0 unfolding.
        const QMat xm = unfold(x, 0);
        const QmcResult r = qmc_solve(xm, ObsMask({xm.rows(), xm.cols()}, mask.data()), sp);
        l = fold(r.L, 0, x.dims());
        s = fold(r.S, 0, x.dims());
        stats = r.stats;
    } else if (o.solver == "rqtc") {
        SolveReport r = rqtc_solve(x, mask, sp);
        l = std::move(r.L);
        s = std::move(r.S);
        stats = r.stats;
    } else if (o.solver == "lrl-rqtc") {
        const PatchConfig pc = patch_config(o);
        LrlReport r = lrl_rqtc_solve(x, mask, pc, sp);
        l = std::move(r.L);
        s = std::move(r.S);
        stats = r.stats;
        rep["groups"] = {{"count", r.groups.size()},
                         {"unobserved", r.unobserved_groups},
                         {"singleton", r.singleton_groups}};
    } else {
        throw std::invalid_argument("complete: --solver must be qmc, rqtc or lrl-rqtc");
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rep["stats"] = stats_json(stats);

    const fs::path dir(o.out);
    fs::create_directories(dir);
    write_qtensor(dir / "L.qten", l);
    write_qtensor(dir / "S.qten", s);
    write_mask(dir / "mask.qmsk", mask);
    if (!o.no_frames && frames_compatible(l)) save_frames(l, dir / "frames");

    out << o.solver << ": " << (stats.converged ? "converged" : "stopped at max-iter") << " after " << stats.iters
        << " iterations\n";
    if (!o.reference.empty()) {
        const QTensor ref = load_any(o.reference);
        const QualityReport q = frames_compatible(ref) ? evaluate(ref, l) : QualityReport{{}, {}, 0, 0, rel_error(ref, l)};
        rep["quality"] = quality_json(q);
        out << "rel_error " << q.rel_error << "\n";
        if (!q.psnr.empty()) out << "mean_psnr " << q.mean_psnr << "\nmean_ssim " << std::fixed << std::setprecision(6)
                                 << q.mean_ssim << std::defaultfloat << "\n";
    }
    write_json(dir / "report.json", rep);
    err << "solve time " << secs << " s\n";
    return stats.converged ? 0 : 2;
}

int cmd_eval(const EvalOpts& o, std::ostream& out) {
    const QTensor ref = load_any(o.ref);
    const QTensor rec = load_any(o.rec);
    const QualityReport q = evaluate(ref, rec);
    out << "frames " << q.psnr.size() << "\n";
    for (std::size_t f = 0; f < q.psnr.size(); ++f)
        out << "frame " << f << " psnr " << q.psnr[f] << " ssim " << std::fixed << std::setprecision(6) << q.ssim[f]
            << std::defaultfloat << "\n";
    out << "mean_psnr " << q.mean_psnr << "\n";
    out << "mean_ssim " << std::fixed << std::setprecision(6) << q.mean_ssim << std::defaultfloat << "\n";
    out << "rel_error " << q.rel_error << "\n";
    if (!o.json_out.empty()) write_json(o.json_out, quality_json(q));
    return 0;
}

int cmd_diagnose(const DiagOpts& o, std::ostream& out) {
    const QTensor x = load_any(o.input);
    for (Index j = 0; j < x.order(); ++j) {
        const QMat m = unfold(x, j);
        const Eigen::VectorXd sv = qsvd(m).sigma;
        out << "mode " << j << ": " << m.rows() << " x " << m.cols() << ", sigma_max " << sv(0) << ", delta_rank "
            << (sv.array() > o.delta).count() << " (delta " << o.delta << ")\n";
    }
    if (x.norm_fro() == 0.0) {
        out << "incoherence: undefined for a zero tensor\n";
        return 0;
    }
    const IncoherenceReport r = incoherence(x);
    for (std::size_t j = 0; j < r.modes.size(); ++j) {
        const ModeIncoherence& m = r.modes[j];
        out << "mode " << j << ": rank " << m.rank << ", mu " << m.mu << "\n";
    }
    out << "t_inf " << r.t_inf << "\nmu_mutual " << r.mu_mutual << "\nmu " << r.mu << "\n";
    return 0;
}

bool starts_with(const std::string& s, const std::string& p) { return s.rfind(p, 0) == 0; }

// Splices config keys into the argument list as --key=value, right after the
// subcommand, skipping keys the command line already sets.
std::vector<std::string> apply_config(std::vector<std::string> args) {
    std::optional<std::string> cfg;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) cfg = args[i + 1];
        else if (starts_with(args[i], "--config=")) cfg = args[i].substr(9);
    }
    if (!cfg) return args;
    const auto kv = read_config(*cfg);
    std::size_t sub = 1;
    while (sub < args.size() && starts_with(args[sub], "-")) ++sub;
    if (sub >= args.size()) return args;
    std::vector<std::string> extra;
    for (const auto& [k, v] : kv) {
        if (k == "config") throw std::runtime_error(*cfg + ": config files cannot include other configs");
        const std::string flag = "--" + k;
        bool given = false;
        for (const std::string& a : args) given = given || a == flag || starts_with(a, flag + "=");
        if (!given) extra.push_back(flag + "=" + v);
    }
    args.insert(args.begin() + static_cast<std::ptrdiff_t>(sub) + 1, extra.begin(), extra.end());
    return args;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Quaternion tensor completion toolkit", "qtc"};
    app.require_subcommand(1);
    std::string config;

    SynthOpts so;
    auto* synth = app.add_subcommand("synth", "write a planted completion problem (L0, S0, X, mask)");
    synth->add_option("--config", config, "key = value file");
    synth->add_option("--kind", so.kind, "planted | video")->capture_default_str();
    synth->add_option("--dims", so.dims, "tensor dimensions")->delimiter(',')->capture_default_str();
    synth->add_option("--ranks", so.ranks, "multilinear ranks (planted)")->delimiter(',')->capture_default_str();
    synth->add_option("--rho", so.rho, "observed ratio")->capture_default_str();
    synth->add_option("--gamma", so.gamma, "corrupted ratio")->capture_default_str();
    synth->add_option("--amplitude", so.amplitude, "corruption amplitude");
    synth->add_option("--seed", so.seed, "random seed")->capture_default_str();
    synth->add_option("--out", so.out, "output directory")->required();

    CompleteOpts co;
    auto* complete = app.add_subcommand("complete", "recover L and S from an observed tensor");
    complete->add_option("--config", config, "key = value file");
    complete->add_option("--input", co.input, "tensor file or PNG frame directory")->required();
    complete->add_option("--mask", co.mask, "mask file");
    complete->add_option("--rho", co.rho, "sample this observed ratio instead of --mask");
    complete->add_option("--mask-seed", co.mask_seed, "seed for --rho")->capture_default_str();
    complete->add_option("--gamma", co.gamma, "add this ratio of sparse corruption")->capture_default_str();
    complete->add_option("--amplitude", co.amplitude, "corruption amplitude (default max |X|)");
    complete->add_option("--noise-seed", co.noise_seed, "seed for --gamma")->capture_default_str();
    complete->add_option("--solver", co.solver, "qmc | rqtc | lrl-rqtc")->capture_default_str();
    complete->add_option("--mu", co.mu, "penalty (default automatic)");
    complete->add_option("--beta", co.beta, "per-mode penalties")->delimiter(',');
    complete->add_option("--lambda", co.lambda, "sparsity weight (default automatic)");
    complete->add_option("--lambda-rule", co.lambda_rule, "squared | linear")->capture_default_str();
    complete->add_option("--alpha", co.alpha, "mode weights")->delimiter(',');
    complete->add_option("--tol", co.tol, "stopping tolerance")->capture_default_str();
    complete->add_option("--max-iter", co.max_iter, "iteration cap")->capture_default_str();
    complete->add_option("--scheme", co.scheme, "split | listing")->capture_default_str();
    complete->add_option("--svt", co.svt, "soft | hard")->capture_default_str();
    complete->add_option("--window", co.window, "window rows,cols")->delimiter(',')->capture_default_str();
    complete->add_option("--patch", co.patch, "patch rows,cols")->delimiter(',')->capture_default_str();
    complete->add_option("--stride", co.stride, "patch stride (default rows/2)");
    complete->add_option("--exemplars", co.exemplars, "exemplars per window")->capture_default_str();
    complete->add_option("--retained-dims", co.retained_dims, "2DQPCA dimension (default energy rule)");
    complete->add_option("--energy", co.energy, "2DQPCA energy fraction")->capture_default_str();
    complete->add_option("--slice-weights", co.slice_weights, "horizontal,lateral,frontal")
        ->delimiter(',')
        ->capture_default_str();
    complete->add_option("--reference", co.reference, "ground truth for a quality report");
    complete->add_flag("--no-frames", co.no_frames, "skip PNG output");
    complete->add_option("--out", co.out, "output directory")->required();

    EvalOpts eo;
    auto* eval = app.add_subcommand("eval", "PSNR, SSIM and relative error of rec against ref");
    eval->add_option("--config", config, "key = value file");
    eval->add_option("ref", eo.ref, "reference tensor file or frame directory")->required();
    eval->add_option("rec", eo.rec, "recovered tensor file or frame directory")->required();
    eval->add_option("--json", eo.json_out, "also write the report as JSON");

    DiagOpts dop;
    auto* diag = app.add_subcommand("diagnose", "incoherence and delta-rank of each unfolding");
    diag->add_option("--config", config, "key = value file");
    diag->add_option("--input", dop.input, "tensor file or frame directory")->required();
    diag->add_option("--delta", dop.delta, "delta-rank threshold")->capture_default_str();

    std::vector<std::string> args(argv, argv + argc);
    try {
        args = apply_config(std::move(args));
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return 1;
    }
    std::vector<const char*> cargs;
    for (const std::string& a : args) cargs.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(cargs.size()), cargs.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*synth) return cmd_synth(so, out);
        if (*complete) return cmd_complete(co, out, err);
        if (*eval) return cmd_eval(eo, out);
        if (*diag) return cmd_diagnose(dop, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

}  // namespace qtc
