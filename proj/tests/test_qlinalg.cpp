#include <cmath>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>

#include "doctest.h"
#include "qtc/qlinalg.hpp"
#include "test_util.hpp"

using namespace qtc;
using qtc::testing::diag_real;

namespace {

// Singular values of chi(A) from the eigenvalues of the Hermitian dilation
// [[0, chi], [chi*, 0]], a route independent of the SVD used by qsvd.
Eigen::VectorXd embedding_singular_values(const QMat& a) {
    const Eigen::MatrixXcd chi = complex_embedding(a);
    const Index m = chi.rows(), n = chi.cols();
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(m + n, m + n);
    h.topRightCorner(m, n) = chi;
    h.bottomLeftCorner(n, m) = chi.adjoint();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h, Eigen::EigenvaluesOnly);
    const Index r = std::min(m, n);
    return es.eigenvalues().tail(r).reverse();
}

double unitarity_error(const QMat& u) {
    return max_abs_diff(u.conj_transpose() * u, QMat::identity(u.cols()));
}

double reconstruction_error(const QMat& a, const QSvd& s) {
    QMat us = s.U;
    for (Index k = 0; k < s.sigma.size(); ++k)
        for (int c = 0; c < 4; ++c) us.part(c).col(k) *= s.sigma(k);
    return norm_fro(a - us * s.V.conj_transpose());
}

QMat random_unitary(Index n, std::mt19937_64& rng) {
    return qsvd(QMat::random_normal(n, n, rng)).U;
}

double nuclear_objective(const QMat& l, const QMat& a, double tau) {
    const double d = norm_fro(l - a);
    return norm(l, NormKind::nuclear) + d * d / (2 * tau);
}

// Minimises 0.5 (t - m)^2 + tau t over t >= 0 by bisection on the sign of
// the derivative t - m + tau.
double line_search(double m, double tau) {
    auto dfdt = [&](double t) { return t - m + tau; };
    if (dfdt(0.0) >= 0.0) return 0.0;
    double lo = 0.0, hi = m + 1.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (dfdt(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("qsvd of a real diagonal matrix") {
    const QSvd s = qsvd(diag_real({3, 1}));
    CHECK(s.sigma(0) == doctest::Approx(3));
    CHECK(s.sigma(1) == doctest::Approx(1));
    CHECK(max_abs_diff(s.U, QMat::identity(2)) <= 1e-12);
    CHECK(max_abs_diff(s.V, QMat::identity(2)) <= 1e-12);
}

TEST_CASE("qsvd of [[i]]") {
    QMat a(1, 1);
    a.set(0, 0, Quat(0, 1, 0, 0));
    const QSvd s = qsvd(a);
    CHECK(s.sigma(0) == doctest::Approx(1));
    CHECK(s.U(0, 0).abs() == doctest::Approx(1));
    CHECK(s.V(0, 0).abs() == doctest::Approx(1));
    CHECK((s.U(0, 0) * s.V(0, 0).conj() - Quat(0, 1, 0, 0)).abs() <= 1e-12);
    // phase convention: largest entry of u real positive
    CHECK(s.U(0, 0).w == doctest::Approx(1));
}

TEST_CASE("qsvd singular values match the complex adjoint pairs") {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 10; ++t) {
        const QMat a = QMat::random_normal(6, 4, rng);
        const QSvd s = qsvd(a);
        const Eigen::VectorXd oracle = embedding_singular_values(a);
        REQUIRE(oracle.size() == 8);
        for (Index k = 0; k < 4; ++k) {
            CHECK(std::abs(s.sigma(k) - oracle(2 * k)) <= 1e-10 * oracle(0));
            CHECK(std::abs(s.sigma(k) - oracle(2 * k + 1)) <= 1e-10 * oracle(0));
        }
    }
}

TEST_CASE("qsvd invariants on random shapes") {
    std::mt19937_64 rng(4);
    std::uniform_int_distribution<int> dim(1, 24);
    for (int t = 0; t < 30; ++t) {
        const QMat a = QMat::random_normal(dim(rng), dim(rng), rng);
        const QSvd s = qsvd(a);
        const Index r = std::min(a.rows(), a.cols());
        REQUIRE(s.U.cols() == r);
        REQUIRE(s.V.cols() == r);
        CHECK(reconstruction_error(a, s) <= 1e-10 * norm_fro(a));
        CHECK(unitarity_error(s.U) <= 1e-10);
        CHECK(unitarity_error(s.V) <= 1e-10);
        for (Index k = 1; k < r; ++k) CHECK(s.sigma(k) <= s.sigma(k - 1));
        CHECK(s.sigma(r - 1) >= 0);
    }
}

TEST_CASE("qsvd handles degenerate spectra") {
    std::mt19937_64 rng(9);
    SUBCASE("identity") {
        const QSvd s = qsvd(QMat::identity(5));
        CHECK((s.sigma.array() - 1.0).abs().maxCoeff() <= 1e-12);
        CHECK(unitarity_error(s.U) <= 1e-10);
        CHECK(unitarity_error(s.V) <= 1e-10);
        CHECK(reconstruction_error(QMat::identity(5), s) <= 1e-10);
    }
    SUBCASE("zero matrix") {
        const QMat z(3, 5);
        const QSvd s = qsvd(z);
        CHECK(s.sigma.maxCoeff() == 0.0);
        CHECK(unitarity_error(s.U) <= 1e-10);
        CHECK(unitarity_error(s.V) <= 1e-10);
    }
    SUBCASE("rank deficient, tall and wide") {
        const QMat l = QMat::random_normal(9, 2, rng) * QMat::random_normal(2, 6, rng);
        for (const QMat& a : {l, l.conj_transpose()}) {
            const QSvd s = qsvd(a);
            CHECK(s.sigma(2) <= 1e-12 * s.sigma(0));
            CHECK(reconstruction_error(a, s) <= 1e-10 * norm_fro(a));
            CHECK(unitarity_error(s.U) <= 1e-10);
            CHECK(unitarity_error(s.V) <= 1e-10);
        }
    }
    SUBCASE("repeated singular values") {
        const QMat u = random_unitary(6, rng), v = random_unitary(4, rng);
        QMat d(6, 4);
        const double sv[4] = {2, 2, 2, 0.5};
        for (Index k = 0; k < 4; ++k) d.set(k, k, Quat::real(sv[k]));
        const QMat a = u * d * v.conj_transpose();
        const QSvd s = qsvd(a);
        for (Index k = 0; k < 4; ++k) CHECK(s.sigma(k) == doctest::Approx(sv[k]).epsilon(1e-12));
        CHECK(reconstruction_error(a, s) <= 1e-10 * norm_fro(a));
        CHECK(unitarity_error(s.U) <= 1e-10);
        CHECK(unitarity_error(s.V) <= 1e-10);
    }
}

TEST_CASE("qsvd rejects bad input") {
    CHECK_THROWS_AS(qsvd(QMat()), std::invalid_argument);
    QMat a(2, 2);
    a.set(0, 0, Quat::real(std::nan("")));
    CHECK_THROWS_AS(qsvd(a), std::runtime_error);
}

TEST_CASE("qeig_hermitian") {
    SUBCASE("identity") {
        const QEig e = qeig_hermitian(QMat::identity(4));
        CHECK((e.lambdas.array() - 1.0).abs().maxCoeff() <= 1e-12);
    }
    SUBCASE("diag(2,1)") {
        const QEig e = qeig_hermitian(diag_real({2, 1}));
        CHECK(e.lambdas(0) == doctest::Approx(2));
        CHECK(e.lambdas(1) == doctest::Approx(1));
        for (Index k = 0; k < 2; ++k) CHECK(e.V(k, k).abs() == doctest::Approx(1));
    }
    SUBCASE("Gram matrix: PSD, trace identity, eigen relation") {
        std::mt19937_64 rng(12);
        for (int t = 0; t < 10; ++t) {
            const QMat phi = QMat::random_normal(7, 5, rng);
            const QMat c = phi.conj_transpose() * phi;
            const QEig e = qeig_hermitian(c);
            const double f = norm_fro(phi);
            CHECK(e.lambdas.minCoeff() >= -1e-12);
            CHECK(std::abs(e.lambdas.sum() - f * f) <= 1e-9 * f * f);
            for (Index k = 1; k < 5; ++k) CHECK(e.lambdas(k) <= e.lambdas(k - 1));
            QMat vl = e.V;
            for (Index k = 0; k < 5; ++k)
                for (int p = 0; p < 4; ++p) vl.part(p).col(k) *= e.lambdas(k);
            CHECK(max_abs_diff(c * e.V, vl) <= 1e-9 * f * f);
            CHECK(unitarity_error(e.V) <= 1e-10);
        }
    }
    SUBCASE("non-Hermitian input is rejected") {
        std::mt19937_64 rng(2);
        CHECK_THROWS_AS(qeig_hermitian(QMat::random_normal(3, 3, rng)), std::invalid_argument);
        CHECK_THROWS_AS(qeig_hermitian(QMat::random_normal(3, 2, rng)), std::invalid_argument);
    }
}

TEST_CASE("shrink_q") {
    QMat a(1, 1);
    a.set(0, 0, Quat::pure(3, 4, 0));
    const QMat s = shrink_q(a, 2.0);
    CHECK((s(0, 0) - Quat::pure(1.8, 2.4, 0)).abs() <= 1e-14);

    std::mt19937_64 rng(21);
    const QMat r = QMat::random_normal(3, 3, rng);
    CHECK(shrink_q(r, 0.0) == r);
    CHECK_THROWS_AS(shrink_q(r, -1.0), std::invalid_argument);

    const double tau = 0.7;
    const QMat out = shrink_q(r, tau);
    for (Index i = 0; i < 3; ++i)
        for (Index j = 0; j < 3; ++j) {
            const Quat z = r(i, j);
            const double t = line_search(z.abs(), tau);
            CHECK((out(i, j) - sign(z) * t).abs() <= 1e-8);
            CHECK(out(i, j).abs() <= z.abs());
        }
    QMat zero(1, 1);
    CHECK(shrink_q(zero, 1.0)(0, 0) == Quat{});
}

TEST_CASE("approx_q soft and hard") {
    const QMat d = diag_real({3, 1});
    CHECK(max_abs_diff(approx_q(d, 2.0), diag_real({1, 0})) <= 1e-12);
    CHECK(max_abs_diff(approx_q(d, 2.0, Threshold::hard), diag_real({3, 0})) <= 1e-12);

    std::mt19937_64 rng(31);
    const QMat a = QMat::random_normal(4, 4, rng);
    CHECK(approx_q(a, 0.0) == a);

    const double tau = 0.5;
    const QMat l = approx_q(a, tau);
    const double f0 = nuclear_objective(l, a, tau);
    const double eps = 1e-4;
    for (int t = 0; t < 100; ++t) {
        const QMat delta = QMat::random_normal(4, 4, rng);
        const double nd = norm_fro(delta);
        const double f1 = nuclear_objective(l + eps * delta, a, tau);
        // strong convexity with modulus 1/tau around the minimiser
        CHECK(f1 - f0 >= 0.99 * eps * eps * nd * nd / (2 * tau));
    }
}

TEST_CASE("approx_q rank and monotonicity") {
    std::mt19937_64 rng(41);
    for (int t = 0; t < 10; ++t) {
        const QMat a = QMat::random_normal(6, 5, rng);
        const Eigen::VectorXd sv = qsvd(a).sigma;
        const double tau = sv(2) * 0.5 + sv(3) * 0.5;
        for (auto mode : {Threshold::soft, Threshold::hard}) {
            const Eigen::VectorXd out = qsvd(approx_q(a, tau, mode)).sigma;
            Index rank = 0;
            for (Index k = 0; k < out.size(); ++k) rank += out(k) > 1e-10 * sv(0);
            CHECK(rank == 3);
            for (Index k = 0; k < out.size(); ++k) CHECK(out(k) <= sv(k) + 1e-12 * sv(0));
        }
    }
}

TEST_CASE("qsvd of constant matrices (exactly rank one)") {
    for (Index n : {2, 17, 40}) {
        QMat a(64, n);
        a.part(1).setConstant(100.0);
        a.part(2).setConstant(50.0);
        a.part(3).setConstant(200.0);
        const QSvd s = qsvd(a);
        CHECK(s.sigma.allFinite());
        CHECK(s.sigma(0) == doctest::Approx(std::sqrt(64.0 * n * (100.0 * 100 + 50 * 50 + 200 * 200))).epsilon(1e-12));
        CHECK(s.sigma(1) <= 1e-10 * s.sigma(0));
        const QMat back = matmul(matmul(s.U, qtc::testing::diag_real_vec(s.sigma)), s.V.conj_transpose());
        CHECK(norm_fro(back - a) <= 1e-10 * norm_fro(a));
    }
}

TEST_CASE("qsvd reconstruction is accurate across many random shapes") {
    // The last draw is a 16 x 19 input on which an unchecked divide-and-conquer
    // SVD of the adjoint reconstructs only to ~3e-10.
    std::mt19937_64 rng(101);
    std::uniform_int_distribution<int> rows(1, 64), cols(1, 48);
    for (int t = 0; t < 100; ++t) {
        const Index m = t == 0 ? 64 : rows(rng), n = t == 0 ? 48 : cols(rng);
        const QMat a = QMat::random_normal(m, n, rng);
        const QSvd s = qsvd(a);
        CHECK(reconstruction_error(a, s) <= 1e-12 * norm_fro(a));
    }
}
