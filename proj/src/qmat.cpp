#include "qtc/qmat.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "qtc/qlinalg.hpp"

namespace qtc {

QMat::QMat(Index rows, Index cols) {
    for (auto& p : planes_) p = Eigen::MatrixXd::Zero(rows, cols);
}

QMat::QMat(Eigen::MatrixXd w, Eigen::MatrixXd x, Eigen::MatrixXd y, Eigen::MatrixXd z)
    : planes_{std::move(w), std::move(x), std::move(y), std::move(z)} {
    for (const auto& p : planes_) {
        if (p.rows() != planes_[0].rows() || p.cols() != planes_[0].cols())
            throw std::invalid_argument("QMat: component planes differ in shape");
    }
}

QMat QMat::identity(Index n) {
    QMat r(n, n);
    r.planes_[0].setIdentity();
    return r;
}

QMat QMat::from_real(const Eigen::MatrixXd& a) {
    QMat r(a.rows(), a.cols());
    r.planes_[0] = a;
    return r;
}

QMat QMat::random_normal(Index rows, Index cols, std::mt19937_64& rng) {
    std::normal_distribution<double> nd(0.0, 1.0);
    QMat r(rows, cols);
    for (auto& p : r.planes_)
        for (Index k = 0; k < p.size(); ++k) p.data()[k] = nd(rng);
    return r;
}

QMat QMat::col(Index j) const { return block(0, j, rows(), 1); }

void QMat::set_col(Index j, const QMat& v) {
    if (v.rows() != rows() || v.cols() != 1) throw std::invalid_argument("QMat::set_col: shape mismatch");
    for (int c = 0; c < 4; ++c) planes_[c].col(j) = v.planes_[c].col(0);
}

QMat QMat::block(Index i, Index j, Index r, Index c) const {
    return QMat(planes_[0].block(i, j, r, c), planes_[1].block(i, j, r, c), planes_[2].block(i, j, r, c),
                planes_[3].block(i, j, r, c));
}

Eigen::MatrixXd QMat::abs2() const {
    return planes_[0].cwiseAbs2() + planes_[1].cwiseAbs2() + planes_[2].cwiseAbs2() + planes_[3].cwiseAbs2();
}

Eigen::MatrixXd QMat::abs() const { return abs2().cwiseSqrt(); }

QMat QMat::conj_transpose() const {
    return QMat(planes_[0].transpose(), -planes_[1].transpose(), -planes_[2].transpose(), -planes_[3].transpose());
}

QMat QMat::transpose() const {
    return QMat(planes_[0].transpose(), planes_[1].transpose(), planes_[2].transpose(), planes_[3].transpose());
}

QMat QMat::conj() const { return QMat(planes_[0], -planes_[1], -planes_[2], -planes_[3]); }

static void check_same_shape(const QMat& a, const QMat& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument(std::string(what) + ": shape mismatch (" + std::to_string(a.rows()) + "x" +
                                    std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                                    std::to_string(b.cols()) + ")");
}

QMat& QMat::operator+=(const QMat& o) {
    check_same_shape(*this, o, "QMat +");
    for (int c = 0; c < 4; ++c) planes_[c] += o.planes_[c];
    return *this;
}

QMat& QMat::operator-=(const QMat& o) {
    check_same_shape(*this, o, "QMat -");
    for (int c = 0; c < 4; ++c) planes_[c] -= o.planes_[c];
    return *this;
}

QMat& QMat::operator*=(double s) {
    for (auto& p : planes_) p *= s;
    return *this;
}

void QMat::scale_col_right(Index j, const Quat& q) {
    for (Index i = 0; i < rows(); ++i) set(i, j, (*this)(i, j) * q);
}

bool operator==(const QMat& a, const QMat& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    for (int c = 0; c < 4; ++c)
        if (a.planes_[c] != b.planes_[c]) return false;
    return true;
}

QMat operator+(QMat a, const QMat& b) { return a += b; }
QMat operator-(QMat a, const QMat& b) { return a -= b; }
QMat operator*(QMat a, double s) { return a *= s; }
QMat operator*(double s, QMat a) { return a *= s; }

QMat matmul(const QMat& a, const QMat& b) {
    if (a.cols() != b.rows())
        throw std::invalid_argument("matmul: inner dimensions differ (" + std::to_string(a.cols()) + " vs " +
                                    std::to_string(b.rows()) + ")");
    const auto& aw = a.w();
    const auto& ax = a.x();
    const auto& ay = a.y();
    const auto& az = a.z();
    const auto& bw = b.w();
    const auto& bx = b.x();
    const auto& by = b.y();
    const auto& bz = b.z();
    Eigen::MatrixXd w = aw * bw;
    w.noalias() -= ax * bx;
    w.noalias() -= ay * by;
    w.noalias() -= az * bz;
    Eigen::MatrixXd x = aw * bx;
    x.noalias() += ax * bw;
    x.noalias() += ay * bz;
    x.noalias() -= az * by;
    Eigen::MatrixXd y = aw * by;
    y.noalias() -= ax * bz;
    y.noalias() += ay * bw;
    y.noalias() += az * bx;
    Eigen::MatrixXd z = aw * bz;
    z.noalias() += ax * by;
    z.noalias() -= ay * bx;
    z.noalias() += az * bw;
    return QMat(std::move(w), std::move(x), std::move(y), std::move(z));
}

Quat inner(const QMat& a, const QMat& b) {
    check_same_shape(a, b, "inner");
    Quat s;
    for (Index j = 0; j < a.cols(); ++j)
        for (Index i = 0; i < a.rows(); ++i) s += a(i, j).conj() * b(i, j);
    return s;
}

double norm(const QMat& a, NormKind kind) {
    if (a.empty()) return 0.0;
    switch (kind) {
        case NormKind::l1: return a.abs().sum();
        case NormKind::inf: return a.abs().maxCoeff();
        case NormKind::fro: return std::sqrt(a.abs2().sum());
        case NormKind::nuclear: return qsvd(a).sigma.sum();
    }
    throw std::invalid_argument("norm: unknown kind");
}

double max_abs_diff(const QMat& a, const QMat& b) {
    check_same_shape(a, b, "max_abs_diff");
    if (a.empty()) return 0.0;
    return (a - b).abs().maxCoeff();
}

}  // namespace qtc
