#include "doctest.h"

#include <random>

#include "qtc/qlinalg.hpp"
#include "qtc/qtensor.hpp"
#include "test_util.hpp"

using namespace qtc;
using qtc::testing::random_tensor;

namespace {

// Mode-j fiber matrix built from index arithmetic alone: entry (r, c) where c
// enumerates the remaining indices with the lowest surviving mode fastest.
QMat naive_unfold(const QTensor& x, Index mode) {
    const Dims& d = x.dims();
    const Index k = x.order();
    QMat m(d[static_cast<std::size_t>(mode)], x.numel() / d[static_cast<std::size_t>(mode)]);
    std::vector<Index> idx(static_cast<std::size_t>(k), 0);
    for (Index lin = 0; lin < x.numel(); ++lin) {
        Index rem = lin;
        for (Index i = 0; i < k; ++i) {
            idx[static_cast<std::size_t>(i)] = rem % d[static_cast<std::size_t>(i)];
            rem /= d[static_cast<std::size_t>(i)];
        }
        Index col = 0, stride = 1;
        for (Index i = 0; i < k; ++i) {
            if (i == mode) continue;
            col += idx[static_cast<std::size_t>(i)] * stride;
            stride *= d[static_cast<std::size_t>(i)];
        }
        m.set(idx[static_cast<std::size_t>(mode)], col, x.at(lin));
    }
    return m;
}

ObsMask random_mask(const Dims& dims, double p, std::mt19937_64& rng) {
    std::bernoulli_distribution b(p);
    std::vector<std::uint8_t> v(static_cast<std::size_t>(dims_numel(dims)));
    for (auto& e : v) e = b(rng) ? 1 : 0;
    return ObsMask(dims, v);
}

}  // namespace

TEST_CASE("unfold of a numbered 2x2x2 tensor") {
    QTensor x({2, 2, 2});
    for (Index i = 0; i < 8; ++i) x.set(i, Quat::real(static_cast<double>(i + 1)));
    // Storage order: (0,0,0)=1, (1,0,0)=2, (0,1,0)=3, (1,1,0)=4, (0,0,1)=5, ...
    const QMat m0 = unfold(x, 0);
    const Eigen::MatrixXd e0 = (Eigen::MatrixXd(2, 4) << 1, 3, 5, 7, 2, 4, 6, 8).finished();
    CHECK(m0.w() == e0);
    const QMat m1 = unfold(x, 1);
    const Eigen::MatrixXd e1 = (Eigen::MatrixXd(2, 4) << 1, 2, 5, 6, 3, 4, 7, 8).finished();
    CHECK(m1.w() == e1);
    const QMat m2 = unfold(x, 2);
    const Eigen::MatrixXd e2 = (Eigen::MatrixXd(2, 4) << 1, 2, 3, 4, 5, 6, 7, 8).finished();
    CHECK(m2.w() == e2);
}

TEST_CASE("unfold matches the index-arithmetic oracle") {
    std::mt19937_64 rng(11);
    for (const Dims& d : {Dims{3, 4, 5}, Dims{2, 3, 4, 2}, Dims{5, 1, 3}, Dims{4, 6}}) {
        const QTensor x = random_tensor(d, rng);
        for (Index j = 0; j < static_cast<Index>(d.size()); ++j) CHECK(unfold(x, j) == naive_unfold(x, j));
    }
}

TEST_CASE("unfold of zeros and shapes") {
    const QTensor z({3, 4, 5});
    const QMat m = unfold(z, 1);
    CHECK(m.rows() == 4);
    CHECK(m.cols() == 15);
    CHECK(norm_fro(m) == 0.0);
    CHECK(fold(m, 1, z.dims()) == z);
}

TEST_CASE("fold inverts unfold bitwise") {
    std::mt19937_64 rng(12);
    for (const Dims& d : {Dims{3, 4, 5}, Dims{2, 3, 4}, Dims{1, 1, 1}, Dims{3, 2, 2, 3}}) {
        const QTensor x = random_tensor(d, rng);
        for (Index j = 0; j < static_cast<Index>(d.size()); ++j) {
            const QMat m = unfold(x, j);
            CHECK(fold(m, j, d) == x);
            CHECK(norm_fro(m) == doctest::Approx(x.norm_fro()).epsilon(1e-12));
        }
    }
}

TEST_CASE("mode-0 unfolding is the storage reinterpreted") {
    std::mt19937_64 rng(13);
    const QTensor x = random_tensor({3, 4, 5}, rng);
    const QMat m = unfold(x, 0);
    for (int c = 0; c < 4; ++c) CHECK(m.part(c).reshaped() == x.part(c));
}

TEST_CASE("fold and unfold reject bad arguments") {
    const QTensor x({2, 3, 4});
    CHECK_THROWS_AS(unfold(x, 3), std::out_of_range);
    CHECK_THROWS_AS(unfold(x, -1), std::out_of_range);
    CHECK_THROWS_AS(fold(QMat(3, 7), 1, x.dims()), std::invalid_argument);
}

TEST_CASE("sample") {
    std::mt19937_64 rng(14);
    const Dims d{4, 3, 2};
    const QTensor x = random_tensor(d, rng);
    CHECK(sample(x, ObsMask::full(d)) == x);
    CHECK(sample(x, ObsMask::none(d)).norm_fro() == 0.0);
    const ObsMask m = random_mask(d, 0.5, rng);
    const QTensor once = sample(x, m);
    CHECK(sample(once, m) == once);
    for (Index i = 0; i < x.numel(); ++i) CHECK(once.at(i) == (m.observed(i) ? x.at(i) : Quat{}));
    CHECK_THROWS_AS(sample(x, ObsMask::full({4, 3, 3})), std::invalid_argument);
}

TEST_CASE("mask ratio is the observed fraction") {
    std::vector<std::uint8_t> v(10, 0);
    v[1] = v[4] = v[7] = 1;
    const ObsMask m({10, 1}, v);
    CHECK(m.count() == 3);
    CHECK(m.rho() == 0.3);
    CHECK(ObsMask::full({2, 2}).rho() == 1.0);
    CHECK(ObsMask::none({2, 2}).rho() == 0.0);
}

TEST_CASE("weight vectors") {
    CHECK_NOTHROW(WeightVec({0.5, 0.25, 0.25}));
    CHECK_THROWS_AS(WeightVec({0.5, 0.6}), std::invalid_argument);
    CHECK_THROWS_AS(WeightVec({1.5, -0.5}), std::invalid_argument);
    const WeightVec u = WeightVec::uniform(3);
    CHECK(std::abs(u[0] + u[1] + u[2] - 1.0) <= 1e-12);
    const WeightVec h = WeightVec::one_hot(3, 1);
    CHECK(h[1] == 1.0);
    CHECK(h[0] == 0.0);
}

TEST_CASE("snn and l1 of zero") {
    const QTensor z({3, 3, 3});
    CHECK(snn(z, WeightVec::uniform(3)) == 0.0);
    CHECK(tensor_l1(z) == 0.0);
}

TEST_CASE("snn of a rank-1 tensor with real unit factors") {
    std::mt19937_64 rng(15);
    std::normal_distribution<double> nd;
    Eigen::VectorXd a(4), b(5), c(3);
    for (auto* v : {&a, &b, &c}) {
        for (Index i = 0; i < v->size(); ++i) (*v)(i) = nd(rng);
        v->normalize();
    }
    QTensor x({4, 5, 3});
    for (Index k = 0; k < 3; ++k)
        for (Index j = 0; j < 5; ++j)
            for (Index i = 0; i < 4; ++i) x.set(i + 4 * (j + 5 * k), Quat::real(a(i) * b(j) * c(k)));
    const double n0 = norm(unfold(x, 0), NormKind::nuclear);
    const double n1 = norm(unfold(x, 1), NormKind::nuclear);
    const double n2 = norm(unfold(x, 2), NormKind::nuclear);
    CHECK(std::abs(n0 - n1) <= 1e-9);
    CHECK(std::abs(n0 - n2) <= 1e-9);
    CHECK(std::abs(n0 - 1.0) <= 1e-9);
    CHECK(std::abs(snn(x, WeightVec({0.2, 0.3, 0.5})) - n0) <= 1e-9);
    CHECK(std::abs(snn(x, WeightVec::one_hot(3, 2)) - n2) <= 1e-12);
}

TEST_CASE("l1 is identical across unfoldings") {
    std::mt19937_64 rng(16);
    const QTensor x = random_tensor({3, 4, 5}, rng);
    const double l = tensor_l1(x);
    for (Index j = 0; j < 3; ++j) CHECK(norm(unfold(x, j), NormKind::l1) == doctest::Approx(l).epsilon(1e-12));
}

TEST_CASE("snn with one-hot weights is the single nuclear norm") {
    std::mt19937_64 rng(17);
    const QTensor x = random_tensor({3, 4, 2}, rng);
    for (Index j = 0; j < 3; ++j)
        CHECK(snn(x, WeightVec::one_hot(3, j)) == doctest::Approx(norm(unfold(x, j), NormKind::nuclear)).epsilon(1e-12));
}
