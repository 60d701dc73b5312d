#include "qtc/solvers.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qtc {

namespace {

void validate(const SolveParams& p, Index order) {
    if (p.mu && (!(*p.mu > 0.0) || !std::isfinite(*p.mu))) throw std::invalid_argument("solver: mu must be positive");
    if (!p.beta.empty() && static_cast<Index>(p.beta.size()) != order)
        throw std::invalid_argument("solver: beta must have one entry per mode");
    for (double b : p.beta)
        if (!(b > 0.0) || !std::isfinite(b)) throw std::invalid_argument("solver: beta must be positive");
    if (p.lambda && !(*p.lambda > 0.0)) throw std::invalid_argument("solver: lambda must be positive");
    if (p.alpha && p.alpha->size() != order) throw std::invalid_argument("solver: alpha must have one entry per mode");
    if (!(p.tol > 0.0)) throw std::invalid_argument("solver: tol must be positive");
    if (p.max_iter < 1) throw std::invalid_argument("solver: max_iter must be >= 1");
}

void check_input(const QTensor& x, const ObsMask& mask) {
    if (x.dims() != mask.dims()) throw std::invalid_argument("solver: mask dims differ from data dims");
    for (int c = 0; c < 4; ++c)
        if (!x.part(c).allFinite()) throw std::runtime_error("solver: input contains non-finite values");
    for (Index i = 0; i < x.numel(); ++i)
        if (!mask.observed(i) && x.at(i).norm2() != 0.0)
            throw std::invalid_argument("solver: observed data must be zero outside the mask");
}

void check_finite(const QTensor& t, const char* name, int iter) {
    for (int c = 0; c < 4; ++c)
        if (!t.part(c).allFinite())
            throw std::runtime_error(std::string("solver: non-finite values in ") + name + " at iteration " +
                                     std::to_string(iter));
}

double max_feasibility_gap(const QTensor& p, const QTensor& q, const QTensor& x, const ObsMask& mask) {
    double gap = 0.0;
    for (Index i = 0; i < x.numel(); ++i)
        if (mask.observed(i)) gap = std::max(gap, (p.at(i) + q.at(i) - x.at(i)).abs());
    return gap;
}

// Entrywise, so the unfolding used is irrelevant.
QTensor shrink_tensor(const QTensor& t, double tau) { return fold(shrink_q(unfold(t, 0), tau), 0, t.dims()); }

QTensor s_update(const QTensor& q, const QTensor& z, double mu, double lambda) {
    QTensor sz = q;
    sz -= z * (1.0 / mu);
    return shrink_tensor(sz, lambda / mu);
}

// Q(Omega) = X - P, Q(~Omega) = S + Z / mu.
void q_update(QTensor& q, const QTensor& x, const QTensor& p, const QTensor& s, const QTensor& z,
              const ObsMask& mask, double mu) {
    for (int c = 0; c < 4; ++c) {
        auto& qc = q.part(c);
        const auto& xc = x.part(c);
        const auto& pc = p.part(c);
        const auto& sc = s.part(c);
        const auto& zc = z.part(c);
        for (Index i = 0; i < qc.size(); ++i) qc(i) = mask.observed(i) ? xc(i) - pc(i) : sc(i) + zc(i) / mu;
    }
}

// P(Omega) = (beta (L + X - S) + Y - Z) / (2 beta), P(~Omega) = L + Y / beta.
void p_single(QTensor& out, const QTensor& l, const QTensor& x, const QTensor& s, const QTensor& y,
              const QTensor& z, const ObsMask& mask, double beta) {
    for (int c = 0; c < 4; ++c) {
        auto& oc = out.part(c);
        const auto& lc = l.part(c);
        const auto& xc = x.part(c);
        const auto& sc = s.part(c);
        const auto& yc = y.part(c);
        const auto& zc = z.part(c);
        for (Index i = 0; i < oc.size(); ++i)
            oc(i) = mask.observed(i) ? (beta * (lc(i) + xc(i) - sc(i)) + yc(i) - zc(i)) / (2.0 * beta)
                                     : lc(i) + yc(i) / beta;
    }
}

QTensor svt_mode(const QTensor& p, const QTensor& y, Index mode, double beta, double tau, Threshold svt) {
    QMat m = unfold(p, mode);
    m -= unfold(y, mode) * (1.0 / beta);
    return fold(approx_q(m, tau, svt), mode, p.dims());
}

struct Resolved {
    WeightVec alpha;
    std::vector<double> beta;
    double mu;
    double lambda;
};

bool record(SolveStats& st, int it, const Residual& r, double tol) {
    st.residual_history.push_back(r);
    st.iters = it;
    st.converged = std::max(r.low_rank, r.sparse) <= tol;
    return st.converged;
}

SolveReport rqtc_split(const QTensor& x, const ObsMask& mask, const SolveParams& params, const Resolved& rp) {
    const Dims& dims = x.dims();
    const double mu = rp.mu;
    const double scale = std::max(1.0, x.norm_fro());

    std::vector<Index> active;
    double beta_sum = 0.0;
    for (Index j = 0; j < x.order(); ++j)
        if (rp.alpha[j] > 0.0) {
            active.push_back(j);
            beta_sum += rp.beta[static_cast<std::size_t>(j)];
        }

    std::vector<QTensor> l(active.size(), x), y(active.size(), QTensor(dims));
    QTensor s(dims), p(dims), q(dims), z(dims), acc(dims);
    SolveReport rep;
    for (int it = 1; it <= params.max_iter; ++it) {
        for (std::size_t a = 0; a < active.size(); ++a) {
            const Index j = active[a];
            const double bj = rp.beta[static_cast<std::size_t>(j)];
            l[a] = svt_mode(p, y[a], j, bj, rp.alpha[j] / bj, params.svt);
        }
        s = s_update(q, z, mu, rp.lambda);

        // P minimises sum_j beta_j/2 ||L_j - P + Y_j/beta_j||^2 + mu/2 ||S - Q + Z/mu||^2
        // with Q = X - P on Omega; off Omega Q is free and P is the weighted mean.
        acc = QTensor(dims);
        for (std::size_t a = 0; a < active.size(); ++a) {
            acc += l[a] * rp.beta[static_cast<std::size_t>(active[a])];
            acc += y[a];
        }
        for (int c = 0; c < 4; ++c) {
            auto& pc = p.part(c);
            const auto& ac = acc.part(c);
            const auto& xc = x.part(c);
            const auto& sc = s.part(c);
            const auto& zc = z.part(c);
            for (Index i = 0; i < pc.size(); ++i)
                pc(i) = mask.observed(i) ? (ac(i) + mu * (xc(i) - sc(i)) - zc(i)) / (beta_sum + mu) : ac(i) / beta_sum;
        }
        q_update(q, x, p, s, z, mask, mu);

        double lr = 0.0;
        for (std::size_t a = 0; a < active.size(); ++a) {
            QTensor dl = l[a] - p;
            lr = std::max(lr, dl.norm_fro());
            y[a] += dl * rp.beta[static_cast<std::size_t>(active[a])];
            check_finite(y[a], "Y", it);
        }
        QTensor ds = s - q;
        z += ds * mu;
        check_finite(z, "Z", it);

        if (record(rep.stats, it, {lr / scale, ds.norm_fro() / scale, max_feasibility_gap(p, q, x, mask)}, params.tol))
            break;
    }
    QTensor lsum(dims);
    for (const auto& la : l) lsum += la;
    rep.L = lsum * (1.0 / static_cast<double>(active.size()));
    rep.S = std::move(s);
    return rep;
}

SolveReport rqtc_listing(const QTensor& x, const ObsMask& mask, const SolveParams& params, const Resolved& rp) {
    const Dims& dims = x.dims();
    const Index k = x.order();
    const double mu = rp.mu;
    const double scale = std::max(1.0, x.norm_fro());
    const double inv_k = 1.0 / static_cast<double>(k);

    QTensor l = x, s(dims), p(dims), q(dims), y(dims), z(dims), pj(dims);
    SolveReport rep;
    for (int it = 1; it <= params.max_iter; ++it) {
        QTensor p_sum(dims);
        for (Index j = 0; j < k; ++j) {
            p_single(pj, l, x, s, y, z, mask, rp.beta[static_cast<std::size_t>(j)]);
            p_sum += pj;
        }
        p = p_sum * inv_k;
        s = s_update(q, z, mu, rp.lambda);

        QTensor l_sum(dims);
        for (Index j = 0; j < k; ++j) {
            const double bj = rp.beta[static_cast<std::size_t>(j)];
            l_sum += svt_mode(p, y, j, bj, rp.alpha[j] / bj, params.svt);
        }
        l = l_sum * inv_k;
        q_update(q, x, p, s, z, mask, mu);

        QTensor dl = l - p;
        QTensor ds = s - q;
        y += dl * mu;
        z += ds * mu;
        check_finite(y, "Y", it);
        check_finite(z, "Z", it);

        if (record(rep.stats, it, {dl.norm_fro() / scale, ds.norm_fro() / scale, max_feasibility_gap(p, q, x, mask)},
                   params.tol))
            break;
    }
    rep.L = std::move(l);
    rep.S = std::move(s);
    return rep;
}

}  // namespace

double default_lambda(const Dims& dims, double rho, const WeightVec& alpha, LambdaRule rule) {
    if (!(rho > 0.0) || rho > 1.0) throw std::invalid_argument("default_lambda: rho must lie in (0, 1]");
    if (alpha.size() != static_cast<Index>(dims.size()))
        throw std::invalid_argument("default_lambda: alpha must have one entry per mode");
    const Index total = dims_numel(dims);
    double lambda = 0.0;
    for (std::size_t j = 0; j < dims.size(); ++j) {
        const Index n1 = std::max(dims[j], total / dims[j]);
        const double a = alpha[static_cast<Index>(j)];
        lambda += (rule == LambdaRule::squared ? a * a : a) / std::sqrt(rho * static_cast<double>(n1));
    }
    return lambda;
}

double default_mu(const QTensor& x) {
    if (x.max_abs() == 0.0) return 1.0;
    return 1.25 / qsvd(unfold(x, 0)).sigma(0);
}

QmcResult qmc_solve(const QMat& x, const ObsMask& mask, const SolveParams& params) {
    validate(params, 2);
    const Dims dims{x.rows(), x.cols()};
    QTensor xt(dims);
    for (int c = 0; c < 4; ++c) xt.part(c) = x.part(c).reshaped();
    check_input(xt, mask);

    const double mu = params.mu ? *params.mu : default_mu(xt);
    const double beta = params.beta.empty() ? mu : params.beta[0];
    const double rho = mask.rho();
    QmcResult res;
    res.stats.mu = mu;
    res.stats.lambda = params.lambda ? *params.lambda
                                     : (rho > 0.0 ? default_lambda(dims, rho, WeightVec::one_hot(2, 0), params.lambda_rule) : 1.0);
    const double lambda = res.stats.lambda;
    const double scale = std::max(1.0, xt.norm_fro());

    // (L, S) from (P, Q), then (P, Q) from the new (L, S).
    QTensor l = xt, s(dims), p(dims), q(dims), y(dims), z(dims);
    for (int it = 1; it <= params.max_iter; ++it) {
        l = svt_mode(p, y, 0, beta, 1.0 / beta, params.svt);
        s = s_update(q, z, mu, lambda);
        p_single(p, l, xt, s, y, z, mask, beta);
        q_update(q, xt, p, s, z, mask, mu);

        QTensor dl = l - p;
        QTensor ds = s - q;
        y += dl * beta;
        z += ds * mu;
        check_finite(y, "Y", it);
        check_finite(z, "Z", it);

        if (record(res.stats, it, {dl.norm_fro() / scale, ds.norm_fro() / scale, max_feasibility_gap(p, q, xt, mask)},
                   params.tol))
            break;
    }
    res.L = unfold(l, 0);
    res.S = unfold(s, 0);
    return res;
}

SolveReport rqtc_solve(const QTensor& x, const ObsMask& mask, const SolveParams& params) {
    const Index k = x.order();
    validate(params, k);
    check_input(x, mask);

    Resolved rp;
    rp.alpha = params.alpha ? *params.alpha : WeightVec::uniform(k);
    rp.mu = params.mu ? *params.mu : default_mu(x);
    rp.beta = params.beta.empty() ? std::vector<double>(static_cast<std::size_t>(k), rp.mu) : params.beta;
    const double rho = mask.rho();
    rp.lambda = params.lambda ? *params.lambda : (rho > 0.0 ? default_lambda(x.dims(), rho, rp.alpha, params.lambda_rule) : 1.0);

    SolveReport rep = params.scheme == RqtcScheme::split ? rqtc_split(x, mask, params, rp)
                                                         : rqtc_listing(x, mask, params, rp);
    rep.stats.lambda = rp.lambda;
    rep.stats.mu = rp.mu;
    return rep;
}

}  // namespace qtc
