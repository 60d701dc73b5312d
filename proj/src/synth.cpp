#include "qtc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

#include "qtc/qlinalg.hpp"

namespace qtc {

namespace {

void check_ratio(double r, const char* what) {
    if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument(std::string(what) + " must lie in [0, 1]");
}

QTensor mode_product(const QTensor& t, const QMat& u, Index mode, Dims out_dims) {
    out_dims[static_cast<std::size_t>(mode)] = u.rows();
    return fold(matmul(u, unfold(t, mode)), mode, out_dims);
}

// Picks `count` distinct entries of `pool` uniformly (partial Fisher-Yates).
std::vector<Index> choose(std::vector<Index> pool, Index count, std::mt19937_64& rng) {
    for (Index i = 0; i < count; ++i) {
        std::uniform_int_distribution<Index> d(i, static_cast<Index>(pool.size()) - 1);
        std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(d(rng))]);
    }
    pool.resize(static_cast<std::size_t>(count));
    return pool;
}

}  // namespace

QTensor gen_lowrank(const Dims& dims, const std::vector<Index>& ranks, std::uint64_t seed) {
    if (ranks.size() != dims.size()) throw std::invalid_argument("gen_lowrank: need one rank per mode");
    const Index total = dims_numel(dims);
    for (std::size_t j = 0; j < dims.size(); ++j) {
        const Index rest = total / dims[j];
        if (ranks[j] < 1 || ranks[j] > std::min(dims[j], rest))
            throw std::invalid_argument("gen_lowrank: rank " + std::to_string(ranks[j]) + " infeasible for mode " +
                                        std::to_string(j));
    }
    // Multilinear ranks must also be mutually consistent: r_j <= prod_{i != j} r_i.
    Index rprod = 1;
    for (Index r : ranks) rprod *= r;
    for (Index r : ranks)
        if (r * r > rprod) throw std::invalid_argument("gen_lowrank: inconsistent multilinear ranks");

    std::mt19937_64 rng(seed);
    Dims cdims(ranks.begin(), ranks.end());
    QTensor t(cdims);
    std::normal_distribution<double> nd;
    for (int c = 0; c < 4; ++c)
        for (Index i = 0; i < t.numel(); ++i) t.part(c)(i) = nd(rng);

    Dims cur = cdims;
    for (std::size_t j = 0; j < dims.size(); ++j) {
        QMat u = j == 0 ? QMat::random_normal(dims[j], ranks[j], rng) : QMat(dims[j], ranks[j]);
        if (j != 0)
            for (Index c = 0; c < ranks[j]; ++c)
                for (Index r = 0; r < dims[j]; ++r) u.part(0)(r, c) = nd(rng);
        t = mode_product(t, u, static_cast<Index>(j), cur);
        cur[j] = dims[j];
    }
    t *= 1.0 / t.norm_fro();
    return t;
}

ObsMask gen_mask(const Dims& dims, double rho, std::uint64_t seed) {
    check_ratio(rho, "rho");
    const Index n = dims_numel(dims);
    const auto count = static_cast<Index>(std::floor(rho * static_cast<double>(n)));
    std::vector<Index> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), Index{0});
    std::mt19937_64 rng(seed);
    ObsMask mask = ObsMask::none(dims);
    for (Index i : choose(std::move(all), count, rng)) mask.set(i, true);
    return mask;
}

QTensor gen_sparse(const Dims& dims, double gamma, double amplitude, std::uint64_t seed, const ObsMask& mask) {
    check_ratio(gamma, "gamma");
    if (!(amplitude >= 0.0)) throw std::invalid_argument("gen_sparse: amplitude must be non-negative");
    if (mask.dims() != dims) throw std::invalid_argument("gen_sparse: mask dims differ");
    const Index n = dims_numel(dims);
    const auto count = static_cast<Index>(std::floor(gamma * static_cast<double>(n)));
    std::vector<Index> obs;
    for (Index i = 0; i < n; ++i)
        if (mask.observed(i)) obs.push_back(i);
    if (count > static_cast<Index>(obs.size()))
        throw std::invalid_argument("gen_sparse: more corrupted entries than observed entries");

    std::mt19937_64 rng(seed);
    std::vector<Index> picked = choose(std::move(obs), count, rng);
    std::sort(picked.begin(), picked.end());
    std::uniform_real_distribution<double> ud(-amplitude, amplitude);
    QTensor s(dims);
    for (Index i : picked) {
        const double x = ud(rng), y = ud(rng), z = ud(rng);
        s.set(i, Quat{0.0, x, y, z});
    }
    return s;
}

PlantedProblem make_planted(const Dims& dims, const std::vector<Index>& ranks, double rho, double gamma,
                            std::uint64_t seed, std::optional<double> amplitude) {
    PlantedProblem p;
    p.seed = seed;
    p.ranks = ranks;
    std::seed_seq seq{seed};
    std::array<std::uint64_t, 3> sub{};
    seq.generate(sub.begin(), sub.end());
    p.L0 = gen_lowrank(dims, ranks, sub[0]);
    p.mask = gen_mask(dims, rho, sub[1]);
    p.S0 = gen_sparse(dims, gamma, amplitude ? *amplitude : p.L0.max_abs(), sub[2], p.mask);
    p.X = sample(p.L0 + p.S0, p.mask);
    return p;
}

PlantedProblem make_video_problem(Index rows, Index cols, Index frames, double rho, double gamma, std::uint64_t seed,
                                  double amplitude) {
    PlantedProblem p;
    p.seed = seed;
    std::seed_seq seq{seed};
    std::array<std::uint64_t, 3> sub{};
    seq.generate(sub.begin(), sub.end());
    p.L0 = smooth_video(rows, cols, frames, sub[0]);
    p.mask = gen_mask(p.L0.dims(), rho, sub[1]);
    p.S0 = gen_sparse(p.L0.dims(), gamma, amplitude, sub[2], p.mask);
    p.X = sample(p.L0 + p.S0, p.mask);
    return p;
}

IncoherenceReport incoherence(const QTensor& x) {
    if (x.norm_fro() == 0.0) throw std::invalid_argument("incoherence: zero tensor");
    const Index k = x.order();
    const Index total = x.numel();
    IncoherenceReport rep;
    QTensor t(x.dims());
    std::vector<double> ratio(static_cast<std::size_t>(k));

    for (Index j = 0; j < k; ++j) {
        const QMat m = unfold(x, j);
        const QSvd s = qsvd(m);
        Index r = 0;
        while (r < s.sigma.size() && s.sigma(r) > 1e-10 * s.sigma(0)) ++r;
        if (r == 0) throw std::runtime_error("incoherence: degenerate SVD");

        const QMat u = s.U.left_cols(r);
        const QMat v = s.V.left_cols(r);
        const QMat uv = matmul(u, v.conj_transpose());
        const double nj = static_cast<double>(x.dim(j));
        const double rest = static_cast<double>(total / x.dim(j));
        const double n1 = std::max(nj, rest);
        const double n2 = std::min(nj, rest);
        const double rj = static_cast<double>(r);

        ModeIncoherence mi;
        mi.rank = r;
        mi.max_row_u = u.abs2().rowwise().sum().maxCoeff();
        mi.max_row_v = v.abs2().rowwise().sum().maxCoeff();
        mi.uv_inf = std::sqrt(uv.abs2().maxCoeff());
        mi.mu = std::max({mi.max_row_u * nj / rj, mi.max_row_v * rest / rj, mi.uv_inf / std::sqrt(rj / (n1 * n2))});
        rep.modes.push_back(mi);

        t += fold(uv, j, x.dims()) * std::sqrt(n1);
        ratio[static_cast<std::size_t>(j)] = std::sqrt(rj / n2);
    }
    rep.t_inf = t.max_abs();
    for (double q : ratio) rep.mu_mutual = std::max(rep.mu_mutual, rep.t_inf / static_cast<double>(k) / q);
    rep.mu = rep.mu_mutual;
    for (const auto& m : rep.modes) rep.mu = std::max(rep.mu, m.mu);
    return rep;
}

QTensor smooth_video(Index rows, Index cols, Index frames, std::uint64_t seed) {
    if (rows < 1 || cols < 1 || frames < 1) throw std::invalid_argument("smooth_video: dimensions must be positive");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
    std::uniform_real_distribution<double> freq(0.5, 1.5);
    std::uniform_real_distribution<double> drift(-0.15, 0.15);

    struct Wave {
        double fx, fy, ph, dx, dy;
    };
    // Two waves per channel plus a per-channel base level.
    std::array<std::array<Wave, 2>, 3> waves{};
    std::array<double, 3> base{};
    for (int c = 0; c < 3; ++c) {
        base[static_cast<std::size_t>(c)] = 90.0 + 25.0 * c;
        for (auto& w : waves[static_cast<std::size_t>(c)]) w = {freq(rng), freq(rng), phase(rng), drift(rng), drift(rng)};
    }

    QTensor v({rows, cols, frames});
    const double two_pi = 2.0 * std::numbers::pi;
    for (Index f = 0; f < frames; ++f)
        for (Index j = 0; j < cols; ++j)
            for (Index i = 0; i < rows; ++i) {
                const double y = static_cast<double>(i) / static_cast<double>(rows);
                const double x = static_cast<double>(j) / static_cast<double>(cols);
                const double tf = static_cast<double>(f);
                Quat q;
                double* comp[3] = {&q.x, &q.y, &q.z};
                for (std::size_t c = 0; c < 3; ++c) {
                    double val = base[c];
                    for (const auto& w : waves[c])
                        val += 45.0 * std::sin(two_pi * (w.fx * (x + w.dx * tf) + w.fy * (y + w.dy * tf)) + w.ph);
                    *comp[c] = val;
                }
                const Index lin = i + rows * (j + cols * f);
                v.set(lin, q);
            }
    return v;
}

}  // namespace qtc
