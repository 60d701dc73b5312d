#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qtc/qtensor.hpp"

namespace qtc {

/// Observed tensor X = P_Omega(L0 + S0) with its ground truth.
struct PlantedProblem {
    QTensor L0;
    QTensor S0;
    ObsMask mask;
    QTensor X;
    std::vector<Index> ranks;
    std::uint64_t seed = 0;
};

/// Tucker product of a Gaussian quaternion core with a Gaussian quaternion
/// mode-0 factor and real Gaussian factors on the remaining modes, scaled to
/// unit Frobenius norm. Real factors commute with quaternion entries, so every
/// unfolding has exactly the requested rank (with probability 1).
QTensor gen_lowrank(const Dims& dims, const std::vector<Index>& ranks, std::uint64_t seed);

/// Exactly floor(rho * numel) observed entries, uniform without replacement.
ObsMask gen_mask(const Dims& dims, double rho, std::uint64_t seed);

/// Exactly floor(gamma * numel) corrupted entries, drawn uniformly among the
/// observed indices of `mask`. Imaginary parts are uniform on [-a, a], the
/// real part is 0.
QTensor gen_sparse(const Dims& dims, double gamma, double amplitude, std::uint64_t seed, const ObsMask& mask);

/// Full planted instance. amplitude defaults to the max entry modulus of L0.
/// Sub-generators get seeds derived from `seed`.
PlantedProblem make_planted(const Dims& dims, const std::vector<Index>& ranks, double rho, double gamma,
                            std::uint64_t seed, std::optional<double> amplitude = std::nullopt);

/// smooth_video ground truth observed through gen_mask with gen_sparse
/// corruption (default amplitude 255). ranks is left empty.
PlantedProblem make_video_problem(Index rows, Index cols, Index frames, double rho, double gamma, std::uint64_t seed,
                                  double amplitude = 255.0);

struct ModeIncoherence {
    Index rank = 0;
    double max_row_u = 0.0;   // max_i ||U_j^* e_i||^2
    double max_row_v = 0.0;   // max_i ||V_j^* e_i||^2
    double uv_inf = 0.0;      // ||U_j V_j^*||_inf
    double mu = 0.0;          // smallest mu satisfying this mode's three bounds
};

struct IncoherenceReport {
    std::vector<ModeIncoherence> modes;
    /// Max entry modulus of T = sum_j sqrt(n_j^(1)) fold_j(U_j V_j^*).
    double t_inf = 0.0;
    /// Smallest mu satisfying the mutual bound for every mode.
    double mu_mutual = 0.0;
    /// Max over all constraints.
    double mu = 0.0;
};

/// Numerical rank uses sigma > 1e-10 * sigma_1. Throws on a zero tensor.
IncoherenceReport incoherence(const QTensor& x);

/// Smooth synthetic colour video on the 0..255 scale, pure quaternion
/// (R -> i, G -> j, B -> k). Low-frequency gradients that drift slowly
/// across frames.
QTensor smooth_video(Index rows, Index cols, Index frames, std::uint64_t seed);

}  // namespace qtc
