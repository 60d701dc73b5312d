#include "qtc/lrl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace qtc {

Index PatchConfig::effective_stride() const { return stride ? *stride : std::max<Index>(1, patch_rows / 2); }

void PatchConfig::validate() const {
    auto fail = [](const std::string& m) { throw std::invalid_argument("PatchConfig: " + m); };
    if (patch_rows < 1 || patch_cols < 1) fail("patch size must be positive");
    if (window_rows < patch_rows || window_cols < patch_cols) fail("patch larger than window");
    if (effective_stride() < 1) fail("stride must be >= 1");
    // A wider step would leave pixels no patch covers.
    if (effective_stride() > std::min(patch_rows, patch_cols)) fail("stride exceeds the patch size");
    if (num_exemplars < 2) fail("at least two exemplars are needed for a covariance");
    if (retained_dims && (*retained_dims < 1 || *retained_dims > patch_cols))
        fail("retained_dims must lie in [1, patch cols]");
    if (!(energy > 0.0 && energy <= 1.0)) fail("energy must lie in (0, 1]");
    if (slice_weights.size() != 3) fail("slice_weights needs three entries");
}

std::vector<Index> block_starts(Index extent, Index len, Index stride) {
    if (len < 1 || stride < 1) throw std::invalid_argument("block_starts: length and stride must be positive");
    if (len > extent) throw std::invalid_argument("block_starts: block larger than extent");
    std::vector<Index> s;
    for (Index p = 0; p + len <= extent; p += stride) s.push_back(p);
    if (s.back() + len < extent) s.push_back(extent - len);
    return s;
}

std::vector<Patch> extract_patches(const std::vector<QMat>& slices, const PatchConfig& cfg) {
    if (cfg.effective_stride() > std::min(cfg.patch_rows, cfg.patch_cols))
        throw std::invalid_argument("extract_patches: stride exceeds the patch size");
    std::vector<Patch> out;
    const Index w = cfg.patch_rows, h = cfg.patch_cols, st = cfg.effective_stride();
    for (std::size_t f = 0; f < slices.size(); ++f) {
        const QMat& sl = slices[f];
        if (w > sl.rows() || h > sl.cols()) throw std::invalid_argument("extract_patches: patch larger than window");
        const auto rows = block_starts(sl.rows(), w, st);
        const auto cols = block_starts(sl.cols(), h, st);
        for (Index i : rows)
            for (Index j : cols) out.push_back({{static_cast<Index>(f), i, j}, sl.block(i, j, w, h)});
    }
    return out;
}

QMat vec(const QMat& y) {
    QMat v(y.size(), 1);
    for (int c = 0; c < 4; ++c) v.part(c) = y.part(c).reshaped();
    return v;
}

namespace {

Index retained(const Eigen::VectorXd& lambdas, const PatchConfig& cfg) {
    const Index h = lambdas.size();
    if (cfg.retained_dims) return *cfg.retained_dims;
    const Eigen::VectorXd l = lambdas.cwiseMax(0.0);
    const double total = l.sum();
    if (!(total > 0.0)) return h;  // identical exemplars: fall back to the raw distance
    double acc = 0.0;
    for (Index k = 0; k < h; ++k) {
        acc += l(k);
        if (acc >= cfg.energy * total) return k + 1;
    }
    return h;
}

}  // namespace

Qpca qpca_fit(const std::vector<QMat>& exemplars, const PatchConfig& cfg) {
    const std::size_t ell = exemplars.size();
    if (ell < 2) throw std::invalid_argument("qpca_fit: need at least two exemplars");
    const Index w = exemplars[0].rows(), h = exemplars[0].cols();
    Qpca m;
    m.psi = QMat(w, h);
    for (const QMat& y : exemplars) {
        if (y.rows() != w || y.cols() != h) throw std::invalid_argument("qpca_fit: exemplar shapes differ");
        m.psi += y;
    }
    m.psi *= 1.0 / static_cast<double>(ell);

    QMat c(h, h);
    for (const QMat& y : exemplars) {
        const QMat phi = y - m.psi;
        c += matmul(phi.conj_transpose(), phi);
    }
    c *= 1.0 / static_cast<double>(ell - 1);
    // Round-off can leave C a hair off Hermitian.
    c = (c + c.conj_transpose()) * 0.5;

    const QEig e = qeig_hermitian(c);
    m.lambdas = e.lambdas;
    m.basis = e.V.left_cols(retained(e.lambdas, cfg));
    return m;
}

QMat qpca_feature(const Qpca& model, const QMat& y) { return matmul(y - model.psi, model.basis); }

std::vector<PatchGroup> classify_2dqpca(const std::vector<Patch>& patches, const std::vector<std::size_t>& exemplars,
                                        const PatchConfig& cfg) {
    if (exemplars.size() < 2) throw std::invalid_argument("classify_2dqpca: need at least two exemplars");
    std::vector<QMat> ex;
    std::vector<char> is_ex(patches.size(), 0);
    for (std::size_t e : exemplars) {
        if (e >= patches.size()) throw std::out_of_range("classify_2dqpca: exemplar index out of range");
        if (is_ex[e]) throw std::invalid_argument("classify_2dqpca: repeated exemplar");
        is_ex[e] = 1;
        ex.push_back(patches[e].y);
    }
    const Qpca model = qpca_fit(ex, cfg);
    std::vector<QMat> feats;
    feats.reserve(ex.size());
    for (const QMat& y : ex) feats.push_back(qpca_feature(model, y));

    std::vector<std::vector<std::size_t>> members(exemplars.size());
    for (std::size_t s = 0; s < exemplars.size(); ++s) members[s].push_back(exemplars[s]);
    for (std::size_t k = 0; k < patches.size(); ++k) {
        if (is_ex[k]) continue;
        const QMat fk = qpca_feature(model, patches[k].y);
        std::size_t best = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (std::size_t s = 0; s < feats.size(); ++s) {
            const double d = norm_fro(fk - feats[s]);
            if (d < bd) {
                bd = d;
                best = s;
            }
        }
        members[best].push_back(k);
    }

    std::vector<PatchGroup> groups(exemplars.size());
    for (std::size_t s = 0; s < exemplars.size(); ++s) {
        auto& m = members[s];
        std::sort(m.begin(), m.end(), [&](std::size_t a, std::size_t b) { return patches[a].loc < patches[b].loc; });
        PatchGroup& g = groups[s];
        g.exemplar = exemplars[s];
        g.members = m;
        g.F = QMat(patches[m[0]].y.size(), static_cast<Index>(m.size()));
        for (std::size_t c = 0; c < m.size(); ++c) {
            g.locations.push_back(patches[m[c]].loc);
            g.F.set_col(static_cast<Index>(c), vec(patches[m[c]].y));
        }
    }
    return groups;
}

std::vector<std::size_t> choose_exemplars(const std::vector<Patch>& patches, const std::vector<Index>& observed,
                                          const PatchConfig& cfg) {
    if (observed.size() != patches.size()) throw std::invalid_argument("choose_exemplars: one count per patch");
    // Disjoint grid: greedily keep positions at least one patch apart.
    auto grid = [](std::vector<Index> pos, Index len) {
        std::sort(pos.begin(), pos.end());
        pos.erase(std::unique(pos.begin(), pos.end()), pos.end());
        std::vector<Index> g;
        for (Index p : pos)
            if (g.empty() || p >= g.back() + len) g.push_back(p);
        return g;
    };
    std::vector<Index> is, js;
    for (const Patch& p : patches) {
        is.push_back(p.loc.i);
        js.push_back(p.loc.j);
    }
    const auto gi = grid(is, cfg.patch_rows);
    const auto gj = grid(js, cfg.patch_cols);

    // Per grid cell, candidate patches ordered by observed count (desc), then frame.
    std::vector<std::vector<std::size_t>> cells;
    for (Index i : gi)
        for (Index j : gj) {
            std::vector<std::size_t> c;
            for (std::size_t k = 0; k < patches.size(); ++k)
                if (patches[k].loc.i == i && patches[k].loc.j == j) c.push_back(k);
            std::stable_sort(c.begin(), c.end(), [&](std::size_t a, std::size_t b) { return observed[a] > observed[b]; });
            cells.push_back(std::move(c));
        }

    std::size_t total = 0;
    for (const auto& c : cells) total += c.size();
    const std::size_t ell = std::min<std::size_t>(static_cast<std::size_t>(cfg.num_exemplars), total);
    if (ell < 2) throw std::invalid_argument("choose_exemplars: window holds fewer than two disjoint patches");

    std::vector<std::size_t> out;
    for (std::size_t round = 0; out.size() < ell; ++round) {
        std::vector<std::size_t> avail;
        for (std::size_t c = 0; c < cells.size(); ++c)
            if (round < cells[c].size()) avail.push_back(c);
        const std::size_t need = ell - out.size();
        if (need >= avail.size()) {
            for (std::size_t c : avail) out.push_back(cells[c][round]);
        } else {
            // Spread the partial round evenly over the cells.
            for (std::size_t s = 0; s < need; ++s) {
                const std::size_t c = avail[(2 * s + 1) * avail.size() / (2 * need)];
                out.push_back(cells[c][round]);
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

Index delta_rank(const QMat& a, double delta) {
    if (!(delta >= 0.0)) throw std::invalid_argument("delta_rank: delta must be non-negative");
    if (a.empty()) return 0;
    const Eigen::VectorXd s = qsvd(a).sigma;
    return static_cast<Index>((s.array() > delta).count());
}

Index separation_rank(const QMat& F, Index i, Index j) {
    const Index d = F.cols();
    if (d > F.rows()) throw std::invalid_argument("separation_rank: needs at least as many rows as columns");
    if (i < 0 || j < 0 || i >= d || j >= d) throw std::out_of_range("separation_rank: column index out of range");
    const QSvd sv = qsvd(F);
    Eigen::VectorXd w2(d), s2 = sv.sigma.array().square();
    for (Index k = 0; k < d; ++k) w2(k) = (sv.V(i, k) - sv.V(j, k)).norm2();
    for (Index r = 0; r < d; ++r) {
        double lhs = 0.0, rhs = 0.0;
        for (Index k = 0; k < r; ++k) lhs += (s2(k) - s2(r)) * w2(k);
        for (Index k = r + 1; k < d; ++k) rhs += (s2(r) - s2(k)) * w2(k);
        if (lhs >= rhs) return r + 1;
    }
    return d;
}

namespace {

// Linear tensor index of slice entry (r, c) of slice f.
struct SliceMap {
    SliceKind kind;
    Index n1, n2, n3;

    Index count() const { return kind == SliceKind::horizontal ? n1 : kind == SliceKind::lateral ? n2 : n3; }
    Index rows() const { return kind == SliceKind::horizontal ? n2 : n1; }
    Index cols() const { return kind == SliceKind::frontal ? n2 : n3; }
    Index at(Index f, Index r, Index c) const {
        switch (kind) {
            case SliceKind::horizontal: return f + n1 * (r + n2 * c);
            case SliceKind::lateral: return r + n1 * (f + n2 * c);
            default: return r + n1 * (c + n2 * f);
        }
    }
};

// Solved groups and pass-through groups are summed apart; a pass-through
// value only counts where no solved patch reaches.
struct Accum {
    struct Sum {
        Eigen::VectorXd l[4], s[4], hits;
        explicit Sum(Index n) : hits(Eigen::VectorXd::Zero(n)) {
            for (int c = 0; c < 4; ++c) {
                l[c] = Eigen::VectorXd::Zero(n);
                s[c] = Eigen::VectorXd::Zero(n);
            }
        }
    };
    Sum solved, passed;
    explicit Accum(Index n) : solved(n), passed(n) {}

    void resolve(int q, double wk, Eigen::VectorXd& l, Eigen::VectorXd& s) const {
        for (Index i = 0; i < l.size(); ++i) {
            const Sum& src = solved.hits(i) > 0.0 ? solved : passed;
            l(i) += wk * (src.l[q](i) / src.hits(i));
            s(i) += wk * (src.s[q](i) / src.hits(i));
        }
    }
};

void merge_history(SolveStats& agg, const SolveStats& g) {
    auto& h = agg.residual_history;
    const auto& gh = g.residual_history;
    const std::size_t n = std::max(h.size(), gh.size());
    const Residual hold = h.empty() ? Residual{0, 0, 0} : h.back();
    h.resize(n, hold);
    for (std::size_t i = 0; i < n; ++i) {
        const Residual& r = gh.empty() ? Residual{0, 0, 0} : gh[std::min(i, gh.size() - 1)];
        h[i].low_rank = std::max(h[i].low_rank, r.low_rank);
        h[i].sparse = std::max(h[i].sparse, r.sparse);
        h[i].feasibility = std::max(h[i].feasibility, r.feasibility);
    }
}

void run_orientation(const QTensor& x, const ObsMask& mask, const SliceMap& sm, const PatchConfig& cfg,
                     const SolveParams& params, const GroupSolver& solver, Accum& acc, LrlReport& rep) {
    if (cfg.patch_rows > sm.rows() || cfg.patch_cols > sm.cols())
        throw std::invalid_argument("lrl_rqtc_solve: patch larger than the slices it is applied to");
    PatchConfig wcfg = cfg;
    wcfg.window_rows = std::min(cfg.window_rows, sm.rows());
    wcfg.window_cols = std::min(cfg.window_cols, sm.cols());

    const Index w = cfg.patch_rows, h = cfg.patch_cols;
    SolveParams gp = params;
    gp.alpha.reset();
    gp.beta.clear();

    const auto wr = block_starts(sm.rows(), wcfg.window_rows, wcfg.window_rows);
    const auto wc = block_starts(sm.cols(), wcfg.window_cols, wcfg.window_cols);
    Index window = 0;
    for (Index r0 : wr)
        for (Index c0 : wc) {
            std::vector<QMat> xs, ms;
            for (Index f = 0; f < sm.count(); ++f) {
                QMat xv(wcfg.window_rows, wcfg.window_cols), mv(wcfg.window_rows, wcfg.window_cols);
                for (Index c = 0; c < wcfg.window_cols; ++c)
                    for (Index r = 0; r < wcfg.window_rows; ++r) {
                        const Index lin = sm.at(f, r0 + r, c0 + c);
                        xv.set(r, c, x.at(lin));
                        mv.part(0)(r, c) = mask.observed(lin) ? 1.0 : 0.0;
                    }
                xs.push_back(std::move(xv));
                ms.push_back(std::move(mv));
            }
            const std::vector<Patch> patches = extract_patches(xs, wcfg);
            const std::vector<Patch> mpatches = extract_patches(ms, wcfg);
            std::vector<Index> obs(patches.size());
            for (std::size_t k = 0; k < patches.size(); ++k)
                obs[k] = static_cast<Index>(mpatches[k].y.part(0).sum());

            const auto exemplars = choose_exemplars(patches, obs, wcfg);
            const auto groups = classify_2dqpca(patches, exemplars, wcfg);

            for (const PatchGroup& g : groups) {
                const Index ds = static_cast<Index>(g.members.size());
                std::vector<std::uint8_t> gm(static_cast<std::size_t>(w * h * ds));
                Index nobs = 0;
                for (Index c = 0; c < ds; ++c) {
                    const QMat& mp = mpatches[g.members[static_cast<std::size_t>(c)]].y;
                    for (Index b = 0; b < h; ++b)
                        for (Index a = 0; a < w; ++a) {
                            const bool o = mp.part(0)(a, b) != 0.0;
                            gm[static_cast<std::size_t>(a + w * b + w * h * c)] = o ? 1 : 0;
                            nobs += o;
                        }
                }
                GroupSummary sum;
                sum.kind = sm.kind;
                sum.window = window;
                sum.size = g.members.size();
                sum.rho = static_cast<double>(nobs) / static_cast<double>(w * h * ds);

                QMat gl, gs;
                if (nobs == 0 || ds == 1) {
                    // Nothing to complete, or a lone column: with lambda at
                    // 1/sqrt(rho wh), lambda ||x||_1 <= ||x||_2 so the split
                    // of a single column is degenerate.
                    sum.unobserved = nobs == 0;
                    sum.singleton = ds == 1;
                    rep.unobserved_groups += sum.unobserved;
                    rep.singleton_groups += sum.singleton;
                    gl = g.F;
                    gs = QMat(g.F.rows(), g.F.cols());
                } else {
                    const QmcResult res = solver(g.F, ObsMask({w * h, ds}, std::move(gm)), gp);
                    gl = res.L;
                    gs = res.S;
                    sum.iters = res.stats.iters;
                    sum.converged = res.stats.converged;
                    rep.stats.iters = std::max(rep.stats.iters, res.stats.iters);
                    rep.stats.converged = rep.stats.converged && res.stats.converged;
                    merge_history(rep.stats, res.stats);
                }
                rep.groups.push_back(sum);
                Accum::Sum& dst = sum.unobserved || sum.singleton ? acc.passed : acc.solved;

                // Inverse map: scatter each column back and count the hits.
                for (Index c = 0; c < ds; ++c) {
                    const PatchLoc& loc = g.locations[static_cast<std::size_t>(c)];
                    for (Index b = 0; b < h; ++b)
                        for (Index a = 0; a < w; ++a) {
                            const Index lin = sm.at(loc.frame, r0 + loc.i + a, c0 + loc.j + b);
                            const Index row = a + w * b;
                            for (int q = 0; q < 4; ++q) {
                                dst.l[q](lin) += gl.part(q)(row, c);
                                dst.s[q](lin) += gs.part(q)(row, c);
                            }
                            dst.hits(lin) += 1.0;
                        }
                }
            }
            ++window;
        }
}

}  // namespace

LrlReport lrl_rqtc_solve(const QTensor& x, const ObsMask& mask, const PatchConfig& cfg, const SolveParams& params,
                         const GroupSolver& solver) {
    cfg.validate();
    if (x.order() != 2 && x.order() != 3) throw std::invalid_argument("lrl_rqtc_solve: expects a 2- or 3-mode tensor");
    if (mask.dims() != x.dims()) throw std::invalid_argument("lrl_rqtc_solve: mask and tensor shapes differ");
    if (params.alpha) throw std::invalid_argument("lrl_rqtc_solve: mode weights do not apply; use slice_weights");
    for (Index i = 0; i < x.numel(); ++i) {
        const Quat q = x.at(i);
        if (!std::isfinite(q.w) || !std::isfinite(q.x) || !std::isfinite(q.y) || !std::isfinite(q.z))
            throw std::runtime_error("lrl_rqtc_solve: non-finite input entry");
        if (!mask.observed(i) && q.norm2() != 0.0)
            throw std::invalid_argument("lrl_rqtc_solve: input must vanish off the observed set");
    }

    const Index n1 = x.dim(0), n2 = x.dim(1), n3 = x.order() == 3 ? x.dim(2) : 1;
    LrlReport rep;
    rep.stats.converged = true;
    rep.L = QTensor(x.dims());
    rep.S = QTensor(x.dims());
    for (int k = 0; k < 3; ++k) {
        const double wk = cfg.slice_weights[k];
        if (wk <= 0.0) continue;
        const SliceMap sm{static_cast<SliceKind>(k), n1, n2, n3};
        Accum acc(x.numel());
        run_orientation(x, mask, sm, cfg, params, solver, acc, rep);
        for (int q = 0; q < 4; ++q) acc.resolve(q, wk, rep.L.part(q), rep.S.part(q));
    }
    return rep;
}

}  // namespace qtc
