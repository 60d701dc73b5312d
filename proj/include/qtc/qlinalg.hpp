#pragma once

#include <Eigen/Dense>

#include "qtc/qmat.hpp"

namespace qtc {

/// Thin quaternion SVD A = U diag(sigma) V*, r = min(m, n).
///
/// Singular values are non-increasing. Each column pair (u_k, v_k) is
/// normalised so that the largest-modulus entry of u_k is real and positive.
struct QSvd {
    QMat U;
    Eigen::VectorXd sigma;
    QMat V;
};

/// Eigendecomposition C V = V diag(lambdas) of a Hermitian quaternion matrix,
/// eigenvalues in non-increasing order.
struct QEig {
    Eigen::VectorXd lambdas;
    QMat V;
};

enum class Threshold { soft, hard };

/// Complex adjoint chi(A) = [[A1, A2], [-conj(A2), conj(A1)]] where
/// A = A1 + A2 j, A1 = W + X i, A2 = Y + Z i. Size 2m x 2n.
Eigen::MatrixXcd complex_embedding(const QMat& a);

/// Throws std::invalid_argument on empty input and std::runtime_error if the
/// underlying complex decomposition fails or produces non-finite values.
QSvd qsvd(const QMat& a);

/// Throws std::invalid_argument unless C is square and C = C* (relative 1e-10).
QEig qeig_hermitian(const QMat& c);

/// Entrywise quaternion soft threshold sign(a_ij) max(|a_ij| - tau, 0).
QMat shrink_q(const QMat& a, double tau);

/// Singular value thresholding. soft: sigma -> max(sigma - tau, 0), the
/// proximal operator of tau ||.||_*. hard: keeps sigma > tau unchanged and
/// zeroes the rest.
QMat approx_q(const QMat& a, double tau, Threshold mode = Threshold::soft);

}  // namespace qtc
