#include "qtc/qlinalg.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace qtc {

namespace {

using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using cplx = std::complex<double>;

// A quaternion column q = q1 + q2 j is represented by the first column of its
// complex adjoint, [q1; -conj(q2)].
void from_first_column(const CVec& v, QMat& out, Index col) {
    const Index m = out.rows();
    for (Index i = 0; i < m; ++i) {
        out.part(0)(i, col) = v(i).real();
        out.part(1)(i, col) = v(i).imag();
        out.part(2)(i, col) = -v(m + i).real();
        out.part(3)(i, col) = v(m + i).imag();
    }
}

// J [a; b] = [-conj(b); conj(a)]; the second column of the adjoint.
CVec j_partner(const CVec& c) {
    const Index h = c.size() / 2;
    CVec r(c.size());
    r.head(h) = -c.tail(h).conjugate();
    r.tail(h) = c.head(h).conjugate();
    return r;
}

// Orthonormal basis closed under J. Accepting a unit vector u adds both u and
// J u, which is the complex image of one quaternion unit vector.
class JBasis {
public:
    JBasis(Index dim, Index max_quats) : basis_(dim, 2 * max_quats) {}

    CVec residual(CVec c) const {
        if (used_ == 0) return c;
        const auto b = basis_.leftCols(used_);
        for (int pass = 0; pass < 2; ++pass) c.noalias() -= b * (b.adjoint() * c);
        return c;
    }

    void accept(const CVec& unit) {
        basis_.col(used_) = unit;
        basis_.col(used_ + 1) = j_partner(unit);
        used_ += 2;
    }

    Index count() const { return used_ / 2; }

private:
    CMat basis_;
    Index used_ = 0;
};

struct Extracted {
    CMat vecs;  // first-column form, one per quaternion vector
    Eigen::VectorXd values;
};

// Picks r quaternion vectors out of a complex orthonormal candidate set whose
// span is closed under J (eigenvalues/singular values of the adjoint occur in
// pairs). Candidates are visited in order, so vectors come out sorted by the
// candidates' values.
Extracted extract_quaternion_vectors(const CMat& cand, const Eigen::VectorXd& values, Index r) {
    const Index dim = cand.rows();
    const Index n = cand.cols();
    JBasis basis(dim, r);
    std::vector<char> used(static_cast<std::size_t>(n), 0);
    std::vector<std::pair<double, CVec>> picked;
    picked.reserve(static_cast<std::size_t>(r));

    for (Index c = 0; c < n && basis.count() < r; ++c) {
        CVec res = basis.residual(cand.col(c));
        const double nr = res.norm();
        if (nr > 0.5) {
            res /= nr;
            basis.accept(res);
            picked.emplace_back(values(c), res);
            used[static_cast<std::size_t>(c)] = 1;
        }
    }
    // Degenerate clusters: a visit-order pass can leave a cluster short. Fill
    // it with the candidate that has the largest remaining component.
    while (basis.count() < r) {
        double best = 0.0;
        Index best_c = -1;
        CVec best_res;
        for (Index c = 0; c < n; ++c) {
            if (used[static_cast<std::size_t>(c)]) continue;
            CVec res = basis.residual(cand.col(c));
            const double nr = res.norm();
            if (nr > best) {
                best = nr;
                best_c = c;
                best_res = std::move(res);
            }
        }
        if (best_c < 0 || best < 1e-6)
            throw std::runtime_error("quaternion vector extraction failed: candidate span is not J-invariant");
        best_res /= best;
        basis.accept(best_res);
        picked.emplace_back(values(best_c), best_res);
        used[static_cast<std::size_t>(best_c)] = 1;
    }
    std::stable_sort(picked.begin(), picked.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });

    Extracted out{CMat(dim, r), Eigen::VectorXd(r)};
    for (Index k = 0; k < r; ++k) {
        out.values(k) = picked[static_cast<std::size_t>(k)].first;
        out.vecs.col(k) = picked[static_cast<std::size_t>(k)].second;
    }
    return out;
}

bool all_finite(const QMat& a) {
    for (int c = 0; c < 4; ++c)
        if (!a.part(c).allFinite()) return false;
    return true;
}

// Makes the largest-modulus entry of u_k real positive; applies the same right
// factor to v_k so that u_k sigma_k v_k* is unchanged.
void fix_phase(QMat& u, QMat* v) {
    for (Index k = 0; k < u.cols(); ++k) {
        Index best = 0;
        double best_m = -1.0;
        for (Index i = 0; i < u.rows(); ++i) {
            const double m = u(i, k).norm2();
            if (m > best_m) {
                best_m = m;
                best = i;
            }
        }
        if (best_m <= 0.0) continue;
        const Quat f = sign(u(best, k)).conj();
        u.scale_col_right(k, f);
        u.set(best, k, Quat::real(u(best, k).abs()));
        if (v) v->scale_col_right(k, f);
    }
}

// m <= n.
QSvd qsvd_wide(const QMat& a) {
    const Index m = a.rows();
    const Index n = a.cols();
    const CMat chi = complex_embedding(a);

    CMat cu;
    Eigen::VectorXd cs;
    {
        Eigen::BDCSVD<CMat> svd(chi, Eigen::ComputeThinU | Eigen::ComputeThinV);
        cu = svd.matrixU();
        cs = svd.singularValues();
        // Eigen 3.4's divide-and-conquer path occasionally loses accuracy
        // (relative reconstruction ~1e-10 on a random 16 x 19 quaternion
        // matrix) or returns NaN on exactly rank-deficient input. Verify and
        // redo those with Jacobi, which is slower but accurate.
        bool good = svd.info() == Eigen::Success && cu.allFinite() && cs.allFinite();
        if (good) {
            const CMat rec = cu * cs.cast<cplx>().asDiagonal() * svd.matrixV().adjoint();
            good = (rec - chi).norm() <= 1e-12 * std::max(chi.norm(), 1e-300);
        }
        if (!good) {
            Eigen::JacobiSVD<CMat> jac(chi, Eigen::ComputeThinU);
            cu = jac.matrixU();
            cs = jac.singularValues();
        }
    }
    if (!cu.allFinite() || !cs.allFinite()) throw std::runtime_error("qsvd: complex SVD produced non-finite values");

    const Extracted left = extract_quaternion_vectors(cu, cs, m);

    QSvd out{QMat(m, m), left.values.cwiseMax(0.0), QMat(n, m)};
    const double smax = out.sigma.size() ? out.sigma(0) : 0.0;
    const double cutoff = 1e-8 * smax;

    JBasis vbasis(2 * n, m);
    for (Index k = 0; k < m; ++k) {
        from_first_column(left.vecs.col(k), out.U, k);
        CVec res;
        double nr = 0.0;
        if (out.sigma(k) > cutoff && out.sigma(k) > 0.0) {
            res = vbasis.residual(chi.adjoint() * left.vecs.col(k) / out.sigma(k));
            nr = res.norm();
        }
        if (nr < 0.5) {
            // Null direction: complete with the quaternion unit vector that
            // has the largest component outside the current span.
            double best = 0.0;
            for (Index i = 0; i < n; ++i) {
                CVec e = CVec::Zero(2 * n);
                e(i) = 1.0;
                CVec r = vbasis.residual(e);
                const double rn = r.norm();
                if (rn > best) {
                    best = rn;
                    res = std::move(r);
                }
            }
            nr = best;
            if (nr <= 0.0) throw std::runtime_error("qsvd: failed to complete right singular vectors");
        }
        res /= nr;
        vbasis.accept(res);
        from_first_column(res, out.V, k);
    }
    return out;
}

}  // namespace

Eigen::MatrixXcd complex_embedding(const QMat& a) {
    const Index m = a.rows();
    const Index n = a.cols();
    CMat chi(2 * m, 2 * n);
    CMat a1(m, n);
    CMat a2(m, n);
    a1.real() = a.w();
    a1.imag() = a.x();
    a2.real() = a.y();
    a2.imag() = a.z();
    chi.topLeftCorner(m, n) = a1;
    chi.topRightCorner(m, n) = a2;
    chi.bottomLeftCorner(m, n) = -a2.conjugate();
    chi.bottomRightCorner(m, n) = a1.conjugate();
    return chi;
}

QSvd qsvd(const QMat& a) {
    if (a.empty()) throw std::invalid_argument("qsvd: empty matrix");
    if (!all_finite(a)) throw std::runtime_error("qsvd: input contains non-finite values");
    QSvd out;
    if (a.rows() <= a.cols()) {
        out = qsvd_wide(a);
    } else {
        QSvd t = qsvd_wide(a.conj_transpose());
        out = QSvd{std::move(t.V), std::move(t.sigma), std::move(t.U)};
    }
    fix_phase(out.U, &out.V);
    return out;
}

QEig qeig_hermitian(const QMat& c) {
    if (c.empty() || c.rows() != c.cols()) throw std::invalid_argument("qeig_hermitian: matrix must be square");
    if (!all_finite(c)) throw std::runtime_error("qeig_hermitian: input contains non-finite values");
    const QMat ch = c.conj_transpose();
    const double scale = std::max(1.0, c.abs().maxCoeff());
    if (max_abs_diff(c, ch) > 1e-10 * scale) throw std::invalid_argument("qeig_hermitian: matrix is not Hermitian");

    QMat sym = c + ch;
    sym *= 0.5;
    const Index h = c.rows();
    const CMat chi = complex_embedding(sym);
    Eigen::SelfAdjointEigenSolver<CMat> es(chi);
    if (es.info() != Eigen::Success) throw std::runtime_error("qeig_hermitian: eigensolver did not converge");

    // Eigen sorts ascending; visit candidates in descending order.
    const CMat cand = es.eigenvectors().rowwise().reverse();
    const Eigen::VectorXd vals = es.eigenvalues().reverse();
    const Extracted ex = extract_quaternion_vectors(cand, vals, h);

    QEig out{ex.values, QMat(h, h)};
    for (Index k = 0; k < h; ++k) from_first_column(ex.vecs.col(k), out.V, k);
    fix_phase(out.V, nullptr);
    return out;
}

QMat shrink_q(const QMat& a, double tau) {
    if (tau < 0.0) throw std::invalid_argument("shrink_q: tau must be non-negative");
    const Eigen::MatrixXd mod = a.abs();
    const Eigen::MatrixXd scale =
        mod.unaryExpr([tau](double m) { return m > tau ? (m - tau) / m : 0.0; });
    QMat out = a;
    for (int c = 0; c < 4; ++c) out.part(c) = a.part(c).cwiseProduct(scale);
    return out;
}

QMat approx_q(const QMat& a, double tau, Threshold mode) {
    if (tau < 0.0) throw std::invalid_argument("approx_q: tau must be non-negative");
    if (tau == 0.0 || a.empty()) return a;
    const QSvd s = qsvd(a);
    Index keep = 0;
    while (keep < s.sigma.size() && s.sigma(keep) > tau) ++keep;
    if (keep == 0) return QMat(a.rows(), a.cols());

    QMat us = s.U.left_cols(keep);
    for (Index k = 0; k < keep; ++k) {
        const double g = mode == Threshold::soft ? s.sigma(k) - tau : s.sigma(k);
        for (int c = 0; c < 4; ++c) us.part(c).col(k) *= g;
    }
    return matmul(us, s.V.left_cols(keep).conj_transpose());
}

}  // namespace qtc
