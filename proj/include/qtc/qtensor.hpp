#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qtc/qmat.hpp"

namespace qtc {

using Dims = std::vector<Index>;

Index dims_numel(const Dims& dims);

/// k-mode quaternion tensor. Each component volume is stored flat in
/// column-major order (first index fastest), so the mode-0 unfolding of a
/// tensor is the same memory viewed as an n0 x (n1 n2 ...) matrix.
class QTensor {
public:
    QTensor() = default;
    explicit QTensor(Dims dims);

    /// Wraps a matrix as an m x n x 1 tensor.
    static QTensor from_matrix(const QMat& m);

    const Dims& dims() const { return dims_; }
    Index order() const { return static_cast<Index>(dims_.size()); }
    Index dim(Index mode) const { return dims_[static_cast<std::size_t>(mode)]; }
    Index numel() const { return planes_[0].size(); }

    const Eigen::VectorXd& part(int c) const { return planes_[static_cast<std::size_t>(c)]; }
    Eigen::VectorXd& part(int c) { return planes_[static_cast<std::size_t>(c)]; }

    Index linear_index(std::span<const Index> idx) const;
    Quat at(Index linear) const {
        return {planes_[0](linear), planes_[1](linear), planes_[2](linear), planes_[3](linear)};
    }
    Quat at(std::initializer_list<Index> idx) const {
        return at(linear_index(std::span<const Index>(idx.begin(), idx.size())));
    }
    void set(Index linear, const Quat& q) {
        planes_[0](linear) = q.w;
        planes_[1](linear) = q.x;
        planes_[2](linear) = q.y;
        planes_[3](linear) = q.z;
    }

    /// Frontal slice X(:, :, k) of a 3-mode tensor.
    QMat frontal_slice(Index k) const;
    void set_frontal_slice(Index k, const QMat& s);

    Eigen::VectorXd abs2() const;
    double norm_fro() const;
    double max_abs() const;

    QTensor& operator+=(const QTensor& o);
    QTensor& operator-=(const QTensor& o);
    QTensor& operator*=(double s);

    friend bool operator==(const QTensor& a, const QTensor& b);

private:
    Dims dims_;
    std::array<Eigen::VectorXd, 4> planes_;
};

QTensor operator+(QTensor a, const QTensor& b);
QTensor operator-(QTensor a, const QTensor& b);
QTensor operator*(QTensor a, double s);
QTensor operator*(double s, QTensor a);

/// Observation set Omega over tensor indices.
class ObsMask {
public:
    ObsMask() = default;
    ObsMask(Dims dims, std::vector<std::uint8_t> observed);

    static ObsMask full(const Dims& dims);
    static ObsMask none(const Dims& dims);

    const Dims& dims() const { return dims_; }
    Index numel() const { return static_cast<Index>(observed_.size()); }
    bool observed(Index linear) const { return observed_[static_cast<std::size_t>(linear)] != 0; }
    void set(Index linear, bool v) { observed_[static_cast<std::size_t>(linear)] = v ? 1 : 0; }
    const std::vector<std::uint8_t>& data() const { return observed_; }

    Index count() const;
    /// |Omega| / prod(dims).
    double rho() const;

    friend bool operator==(const ObsMask&, const ObsMask&) = default;

private:
    Dims dims_;
    std::vector<std::uint8_t> observed_;
};

/// Non-negative weights summing to one.
class WeightVec {
public:
    WeightVec() = default;
    explicit WeightVec(std::vector<double> alpha);

    static WeightVec uniform(Index k);
    static WeightVec one_hot(Index k, Index j);

    Index size() const { return static_cast<Index>(alpha_.size()); }
    double operator[](Index j) const { return alpha_[static_cast<std::size_t>(j)]; }
    const std::vector<double>& values() const { return alpha_; }

private:
    std::vector<double> alpha_;
};

/// Mode-j unfolding (j is 0-based): n_j x prod_{i != j} n_i, columns are the
/// mode-j fibers with the remaining indices ordered lowest mode fastest.
QMat unfold(const QTensor& x, Index mode);

/// Inverse of unfold.
QTensor fold(const QMat& m, Index mode, const Dims& dims);

/// P_Omega: keeps observed entries, zeroes the rest.
QTensor sample(const QTensor& x, const ObsMask& mask);

/// Sum_j alpha_j ||X_(j)||_*.
double snn(const QTensor& x, const WeightVec& alpha);

/// Sum of entry moduli, identical for every unfolding.
double tensor_l1(const QTensor& x);

}  // namespace qtc
