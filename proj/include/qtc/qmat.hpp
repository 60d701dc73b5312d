#pragma once

#include <array>
#include <cstddef>
#include <random>

#include <Eigen/Dense>

#include "qtc/quat.hpp"

namespace qtc {

using Index = Eigen::Index;

enum class NormKind { l1, inf, fro, nuclear };

/// Dense quaternion matrix A = W + X i + Y j + Z k, stored as four
/// column-major real planes of identical shape.
class QMat {
public:
    QMat() = default;
    QMat(Index rows, Index cols);
    QMat(Eigen::MatrixXd w, Eigen::MatrixXd x, Eigen::MatrixXd y, Eigen::MatrixXd z);

    static QMat zeros(Index rows, Index cols) { return QMat(rows, cols); }
    static QMat identity(Index n);
    static QMat from_real(const Eigen::MatrixXd& a);
    /// Entries with i.i.d. standard normal components.
    static QMat random_normal(Index rows, Index cols, std::mt19937_64& rng);

    Index rows() const { return planes_[0].rows(); }
    Index cols() const { return planes_[0].cols(); }
    Index size() const { return planes_[0].size(); }
    bool empty() const { return size() == 0; }

    /// Component plane c (0 = W, 1 = X, 2 = Y, 3 = Z).
    const Eigen::MatrixXd& part(int c) const { return planes_[static_cast<std::size_t>(c)]; }
    Eigen::MatrixXd& part(int c) { return planes_[static_cast<std::size_t>(c)]; }
    const Eigen::MatrixXd& w() const { return planes_[0]; }
    const Eigen::MatrixXd& x() const { return planes_[1]; }
    const Eigen::MatrixXd& y() const { return planes_[2]; }
    const Eigen::MatrixXd& z() const { return planes_[3]; }

    Quat operator()(Index i, Index j) const {
        return {planes_[0](i, j), planes_[1](i, j), planes_[2](i, j), planes_[3](i, j)};
    }
    void set(Index i, Index j, const Quat& q) {
        planes_[0](i, j) = q.w;
        planes_[1](i, j) = q.x;
        planes_[2](i, j) = q.y;
        planes_[3](i, j) = q.z;
    }

    QMat col(Index j) const;
    void set_col(Index j, const QMat& v);
    QMat block(Index i, Index j, Index rows, Index cols) const;
    QMat left_cols(Index n) const { return block(0, 0, rows(), n); }

    /// Entrywise |a_ij|.
    Eigen::MatrixXd abs() const;
    /// Entrywise |a_ij|^2.
    Eigen::MatrixXd abs2() const;

    QMat conj_transpose() const;
    QMat transpose() const;
    QMat conj() const;

    QMat& operator+=(const QMat& o);
    QMat& operator-=(const QMat& o);
    QMat& operator*=(double s);

    /// Scales column j on the right by q: A(:, j) * q.
    void scale_col_right(Index j, const Quat& q);

    friend bool operator==(const QMat& a, const QMat& b);

private:
    std::array<Eigen::MatrixXd, 4> planes_;
};

QMat operator+(QMat a, const QMat& b);
QMat operator-(QMat a, const QMat& b);
QMat operator*(QMat a, double s);
QMat operator*(double s, QMat a);

/// Quaternion matrix product with Hamilton products in factor order.
QMat matmul(const QMat& a, const QMat& b);
inline QMat operator*(const QMat& a, const QMat& b) { return matmul(a, b); }

/// Sum_ij conj(a_ij) b_ij for two column vectors (the quaternion inner product a* b).
Quat inner(const QMat& a, const QMat& b);

double norm(const QMat& a, NormKind kind);
inline double norm_fro(const QMat& a) { return norm(a, NormKind::fro); }

/// Max |a_ij - b_ij|.
double max_abs_diff(const QMat& a, const QMat& b);

}  // namespace qtc
