#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <vector>

#include "qtc/qlinalg.hpp"
#include "qtc/solvers.hpp"

namespace qtc {

/// Slice orientations of a 3-mode tensor, in weight order: horizontal slices
/// fix the first index, lateral the second, frontal the third.
enum class SliceKind { horizontal = 0, lateral = 1, frontal = 2 };

struct PatchConfig {
    Index window_rows = 32;
    Index window_cols = 32;
    Index patch_rows = 8;  // w
    Index patch_cols = 8;  // h
    std::optional<Index> stride;  // default floor(w / 2), at least 1
    Index num_exemplars = 4;      // l
    std::optional<Index> retained_dims;  // d; unset means the energy rule
    double energy = 0.9;
    WeightVec slice_weights = WeightVec::one_hot(3, 2);

    Index effective_stride() const;
    /// Throws std::invalid_argument on an inconsistent configuration.
    void validate() const;
};

/// Patch position in slice coordinates: rows i..i+w-1, cols j..j+h-1 of
/// slice `frame`.
struct PatchLoc {
    Index frame = 0, i = 0, j = 0;
    friend auto operator<=>(const PatchLoc&, const PatchLoc&) = default;
};

struct Patch {
    PatchLoc loc;
    QMat y;
};

struct PatchGroup {
    std::size_t exemplar = 0;          // index into the patch set
    std::vector<std::size_t> members;  // indices into the patch set, sorted by location
    std::vector<PatchLoc> locations;
    QMat F;  // (w h) x d_s, column c = vec of member c
};

/// 2DQPCA model fitted on the exemplar patches.
struct Qpca {
    QMat psi;                 // mean exemplar, w x h
    Eigen::VectorXd lambdas;  // eigenvalues of the covariance, non-increasing
    QMat basis;               // h x d leading eigenvectors
};

/// Start offsets 0, s, 2s, ... plus a final extent - len so the last block
/// touches the end. Throws if len < 1, s < 1 or len > extent.
std::vector<Index> block_starts(Index extent, Index len, Index stride);

/// All stride-spaced w x h patches of every slice in the stack, ordered by
/// (frame, i, j). Locations are relative to the slices given.
std::vector<Patch> extract_patches(const std::vector<QMat>& slices, const PatchConfig& cfg);

/// Column-major vectorisation of a patch.
QMat vec(const QMat& y);

/// Fits the mean, covariance eigenbasis and retained dimension. Throws if
/// fewer than two exemplars are given.
Qpca qpca_fit(const std::vector<QMat>& exemplars, const PatchConfig& cfg);

/// Feature (Y - psi) V_d.
QMat qpca_feature(const Qpca& model, const QMat& y);

/// Every patch joins the exemplar whose feature is nearest in Frobenius norm
/// (ties go to the lower exemplar); exemplar s always heads group s.
std::vector<PatchGroup> classify_2dqpca(const std::vector<Patch>& patches, const std::vector<std::size_t>& exemplars,
                                        const PatchConfig& cfg);

/// l pairwise disjoint exemplars drawn from a non-overlapping grid of patch
/// positions. At each grid cell the frame with the most observed pixels is
/// preferred. `observed` holds one count per patch.
std::vector<std::size_t> choose_exemplars(const std::vector<Patch>& patches, const std::vector<Index>& observed,
                                          const PatchConfig& cfg);

/// Number of singular values strictly greater than delta.
Index delta_rank(const QMat& a, double delta);

/// Least r (1-based) with
///   sum_{k<r} (s_k^2 - s_r^2) |w_k|^2 >= sum_{k>r} (s_r^2 - s_k^2) |w_k|^2
/// where s are the singular values of F and w is the difference of rows i
/// and j of its right singular vectors, so that ||x_i - x_j||^2 =
/// sum_k s_k^2 |w_k|^2. Columns within sqrt(2) delta of each other force
/// s_r <= delta. Requires cols(F) <= rows(F).
Index separation_rank(const QMat& F, Index i, Index j);

struct GroupSummary {
    SliceKind kind = SliceKind::frontal;
    Index window = 0;
    std::size_t size = 0;  // d_s
    double rho = 0.0;
    // Passed through untouched (L = F, S = 0): no observed entry, or a
    // single column. Such values only fill pixels no solved group covers.
    bool unobserved = false;
    bool singleton = false;
    int iters = 0;
    bool converged = true;
};

struct LrlReport {
    QTensor L, S;
    /// iters is the largest group count, converged holds when every solved
    /// group converged, residual_history is the per-iteration maximum over
    /// groups (a finished group keeps its last value). lambda and mu are
    /// chosen per group and left at zero here.
    SolveStats stats;
    std::vector<GroupSummary> groups;
    Index unobserved_groups = 0;
    Index singleton_groups = 0;
};

/// Solves one group matrix; qmc_solve by default.
using GroupSolver = std::function<QmcResult(const QMat&, const ObsMask&, const SolveParams&)>;

/// Patch-grouped completion of a 2- or 3-mode tensor (a 2-mode tensor is one
/// frame). Each group matrix is solved by qmc_solve with lambda from
/// default_lambda on its own shape and observed ratio unless params.lambda is
/// set; overlapping reconstructions are averaged with uniform weights.
LrlReport lrl_rqtc_solve(const QTensor& x, const ObsMask& mask, const PatchConfig& cfg, const SolveParams& params,
                         const GroupSolver& solver = qmc_solve);

}  // namespace qtc
