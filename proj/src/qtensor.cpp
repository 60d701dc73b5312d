#include "qtc/qtensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace qtc {

Index dims_numel(const Dims& dims) {
    Index n = 1;
    for (Index d : dims) n *= d;
    return n;
}

static std::string dims_str(const Dims& d) {
    std::string s = "(";
    for (std::size_t i = 0; i < d.size(); ++i) s += (i ? "," : "") + std::to_string(d[i]);
    return s + ")";
}

QTensor::QTensor(Dims dims) : dims_(std::move(dims)) {
    if (dims_.size() < 2) throw std::invalid_argument("QTensor: need at least 2 modes");
    for (Index d : dims_)
        if (d <= 0) throw std::invalid_argument("QTensor: dimensions must be positive, got " + dims_str(dims_));
    const Index n = dims_numel(dims_);
    for (auto& p : planes_) p = Eigen::VectorXd::Zero(n);
}

QTensor QTensor::from_matrix(const QMat& m) {
    QTensor t({m.rows(), m.cols(), 1});
    for (int c = 0; c < 4; ++c) t.planes_[c] = m.part(c).reshaped();
    return t;
}

Index QTensor::linear_index(std::span<const Index> idx) const {
    if (idx.size() != dims_.size()) throw std::invalid_argument("QTensor: index rank mismatch");
    Index lin = 0;
    Index stride = 1;
    for (std::size_t i = 0; i < dims_.size(); ++i) {
        if (idx[i] < 0 || idx[i] >= dims_[i]) throw std::out_of_range("QTensor: index out of range");
        lin += idx[i] * stride;
        stride *= dims_[i];
    }
    return lin;
}

QMat QTensor::frontal_slice(Index k) const {
    if (order() != 3) throw std::invalid_argument("frontal_slice: tensor must have 3 modes");
    const Index n0 = dims_[0], n1 = dims_[1];
    QMat s(n0, n1);
    for (int c = 0; c < 4; ++c)
        s.part(c) = planes_[c].segment(k * n0 * n1, n0 * n1).reshaped(n0, n1);
    return s;
}

void QTensor::set_frontal_slice(Index k, const QMat& s) {
    if (order() != 3 || s.rows() != dims_[0] || s.cols() != dims_[1])
        throw std::invalid_argument("set_frontal_slice: shape mismatch");
    const Index n = dims_[0] * dims_[1];
    for (int c = 0; c < 4; ++c) planes_[c].segment(k * n, n) = s.part(c).reshaped();
}

Eigen::VectorXd QTensor::abs2() const {
    return planes_[0].cwiseAbs2() + planes_[1].cwiseAbs2() + planes_[2].cwiseAbs2() + planes_[3].cwiseAbs2();
}

double QTensor::norm_fro() const { return numel() ? std::sqrt(abs2().sum()) : 0.0; }

double QTensor::max_abs() const { return numel() ? std::sqrt(abs2().maxCoeff()) : 0.0; }

static void check_same_dims(const Dims& a, const Dims& b, const char* what) {
    if (a != b) throw std::invalid_argument(std::string(what) + ": dimension mismatch " + dims_str(a) + " vs " + dims_str(b));
}

QTensor& QTensor::operator+=(const QTensor& o) {
    check_same_dims(dims_, o.dims_, "QTensor +");
    for (int c = 0; c < 4; ++c) planes_[c] += o.planes_[c];
    return *this;
}

QTensor& QTensor::operator-=(const QTensor& o) {
    check_same_dims(dims_, o.dims_, "QTensor -");
    for (int c = 0; c < 4; ++c) planes_[c] -= o.planes_[c];
    return *this;
}

QTensor& QTensor::operator*=(double s) {
    for (auto& p : planes_) p *= s;
    return *this;
}

bool operator==(const QTensor& a, const QTensor& b) {
    if (a.dims_ != b.dims_) return false;
    for (int c = 0; c < 4; ++c)
        if (a.planes_[c] != b.planes_[c]) return false;
    return true;
}

QTensor operator+(QTensor a, const QTensor& b) { return a += b; }
QTensor operator-(QTensor a, const QTensor& b) { return a -= b; }
QTensor operator*(QTensor a, double s) { return a *= s; }
QTensor operator*(double s, QTensor a) { return a *= s; }

ObsMask::ObsMask(Dims dims, std::vector<std::uint8_t> observed) : dims_(std::move(dims)), observed_(std::move(observed)) {
    if (static_cast<Index>(observed_.size()) != dims_numel(dims_))
        throw std::invalid_argument("ObsMask: payload size does not match dims " + dims_str(dims_));
    for (auto& v : observed_) v = v ? 1 : 0;
}

ObsMask ObsMask::full(const Dims& dims) {
    return ObsMask(dims, std::vector<std::uint8_t>(static_cast<std::size_t>(dims_numel(dims)), 1));
}

ObsMask ObsMask::none(const Dims& dims) {
    return ObsMask(dims, std::vector<std::uint8_t>(static_cast<std::size_t>(dims_numel(dims)), 0));
}

Index ObsMask::count() const {
    return static_cast<Index>(std::count(observed_.begin(), observed_.end(), std::uint8_t{1}));
}

double ObsMask::rho() const {
    return observed_.empty() ? 0.0 : static_cast<double>(count()) / static_cast<double>(observed_.size());
}

WeightVec::WeightVec(std::vector<double> alpha) : alpha_(std::move(alpha)) {
    if (alpha_.empty()) throw std::invalid_argument("WeightVec: empty");
    double s = 0.0;
    for (double a : alpha_) {
        if (!(a >= 0.0) || !std::isfinite(a)) throw std::invalid_argument("WeightVec: weights must be finite and >= 0");
        s += a;
    }
    if (std::abs(s - 1.0) > 1e-12) throw std::invalid_argument("WeightVec: weights must sum to 1");
}

WeightVec WeightVec::uniform(Index k) {
    // Last entry absorbs rounding so the sum is 1 within 1e-12.
    std::vector<double> a(static_cast<std::size_t>(k), 1.0 / static_cast<double>(k));
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < a.size(); ++i) s += a[i];
    a.back() = 1.0 - s;
    return WeightVec(std::move(a));
}

WeightVec WeightVec::one_hot(Index k, Index j) {
    std::vector<double> a(static_cast<std::size_t>(k), 0.0);
    a.at(static_cast<std::size_t>(j)) = 1.0;
    return WeightVec(std::move(a));
}

namespace {

struct ModeSplit {
    Index lo;  // prod of dims before the mode
    Index n;   // dim of the mode
    Index hi;  // prod of dims after the mode
};

ModeSplit split(const Dims& dims, Index mode) {
    if (mode < 0 || mode >= static_cast<Index>(dims.size()))
        throw std::out_of_range("mode " + std::to_string(mode) + " out of range for a " +
                                std::to_string(dims.size()) + "-mode tensor");
    ModeSplit s{1, dims[static_cast<std::size_t>(mode)], 1};
    for (Index i = 0; i < mode; ++i) s.lo *= dims[static_cast<std::size_t>(i)];
    for (Index i = mode + 1; i < static_cast<Index>(dims.size()); ++i) s.hi *= dims[static_cast<std::size_t>(i)];
    return s;
}

}  // namespace

// linear = lo + A (r + n hi); column = lo + A hi.
QMat unfold(const QTensor& x, Index mode) {
    const ModeSplit s = split(x.dims(), mode);
    QMat m(s.n, s.lo * s.hi);
    for (int c = 0; c < 4; ++c) {
        const double* src = x.part(c).data();
        Eigen::MatrixXd& dst = m.part(c);
        for (Index h = 0; h < s.hi; ++h)
            for (Index r = 0; r < s.n; ++r)
                for (Index l = 0; l < s.lo; ++l) dst(r, l + s.lo * h) = src[l + s.lo * (r + s.n * h)];
    }
    return m;
}

QTensor fold(const QMat& m, Index mode, const Dims& dims) {
    QTensor x(dims);
    const ModeSplit s = split(dims, mode);
    if (m.rows() != s.n || m.cols() != s.lo * s.hi)
        throw std::invalid_argument("fold: matrix is " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) +
                                    ", expected " + std::to_string(s.n) + "x" + std::to_string(s.lo * s.hi));
    for (int c = 0; c < 4; ++c) {
        double* dst = x.part(c).data();
        const Eigen::MatrixXd& src = m.part(c);
        for (Index h = 0; h < s.hi; ++h)
            for (Index r = 0; r < s.n; ++r)
                for (Index l = 0; l < s.lo; ++l) dst[l + s.lo * (r + s.n * h)] = src(r, l + s.lo * h);
    }
    return x;
}

QTensor sample(const QTensor& x, const ObsMask& mask) {
    check_same_dims(x.dims(), mask.dims(), "sample");
    QTensor out = x;
    for (Index i = 0; i < x.numel(); ++i)
        if (!mask.observed(i)) out.set(i, Quat{});
    return out;
}

double snn(const QTensor& x, const WeightVec& alpha) {
    if (alpha.size() != x.order()) throw std::invalid_argument("snn: weight count must equal tensor order");
    double s = 0.0;
    for (Index j = 0; j < x.order(); ++j)
        if (alpha[j] > 0.0) s += alpha[j] * norm(unfold(x, j), NormKind::nuclear);
    return s;
}

double tensor_l1(const QTensor& x) { return x.abs2().cwiseSqrt().sum(); }

}  // namespace qtc
