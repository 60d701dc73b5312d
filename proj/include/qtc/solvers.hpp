#pragma once

#include <optional>
#include <vector>

#include "qtc/qlinalg.hpp"
#include "qtc/qtensor.hpp"

namespace qtc {

/// Iteration scheme for the tensor solver.
enum class RqtcScheme {
    /// Two-block ADMM with one copy L_j and one multiplier Y_j per mode with
    /// alpha_j > 0. Block one updates every L_j by singular value thresholding
    /// and S by shrinkage; block two updates P and Q jointly. Converges, and
    /// with a single active mode it is exactly the matrix iteration.
    split,
    /// Single-multiplier variant: one L and one Y, the L-step
    /// averages all k thresholded unfoldings with weight 1/k, and the sub-steps
    /// run in the order P, S, L, Q. Not a two-block splitting; it can diverge.
    listing,
};

/// How the automatic sparsity weight combines the per-mode values 1/sqrt(rho n_j^(1)).
enum class LambdaRule {
    /// sum_j alpha_j^2 / sqrt(rho n_j^(1)).
    squared,
    /// sum_j alpha_j / sqrt(rho n_j^(1)), the weight that balances the
    /// alpha-weighted nuclear norms against the l1 term one mode at a time.
    linear,
};

struct SolveParams {
    /// Penalty on S = Q and dual step size; nullopt resolves through default_mu.
    std::optional<double> mu;
    /// Per-mode penalties on L = P; empty means beta_j = mu for every mode.
    std::vector<double> beta;
    /// Sparsity weight; nullopt resolves through default_lambda.
    std::optional<double> lambda;
    LambdaRule lambda_rule = LambdaRule::squared;
    /// Mode weights; nullopt means uniform.
    std::optional<WeightVec> alpha;
    double tol = 1e-4;
    int max_iter = 500;
    Threshold svt = Threshold::soft;
    RqtcScheme scheme = RqtcScheme::split;
};

/// Per-iteration record. Residuals are normalised by max(1, ||X||_F).
struct Residual {
    double low_rank = 0.0;     // ||L - P||_F
    double sparse = 0.0;       // ||S - Q||_F
    double feasibility = 0.0;  // max over Omega of |P + Q - X|
};

struct SolveStats {
    int iters = 0;
    std::vector<Residual> residual_history;
    bool converged = false;
    /// Resolved parameters.
    double lambda = 0.0;
    double mu = 0.0;
};

struct SolveReport {
    QTensor L;
    QTensor S;
    SolveStats stats;
};

struct QmcResult {
    QMat L;
    QMat S;
    SolveStats stats;
};

/// lambda = sum_j alpha_j^2 / sqrt(rho n_j^(1)), n_j^(1) = max(n_j, prod_{i != j} n_i),
/// or with alpha_j in place of alpha_j^2 under LambdaRule::linear.
double default_lambda(const Dims& dims, double rho, const WeightVec& alpha, LambdaRule rule = LambdaRule::squared);

/// 1.25 / ||X_(1)||_2 (largest singular value of the mode-0 unfolding), or 1
/// when X vanishes. Ties the penalty to the data scale.
double default_mu(const QTensor& x);

/// Robust quaternion matrix completion by two-block ADMM:
///   min ||L||_* + lambda ||S||_1  s.t.  P_Omega(L + S) = X.
/// X must vanish off Omega. The mask has dims (rows, cols).
QmcResult qmc_solve(const QMat& x, const ObsMask& mask, const SolveParams& params);

/// Robust quaternion tensor completion:
///   min sum_j alpha_j ||L_(j)||_* + lambda ||S||_1  s.t.  P_Omega(L + S) = X.
SolveReport rqtc_solve(const QTensor& x, const ObsMask& mask, const SolveParams& params);

}  // namespace qtc
