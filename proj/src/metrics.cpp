#include "qtc/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace qtc {

namespace {

constexpr int kWindow = 8;

void check_same(const QMat& a, const QMat& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw std::invalid_argument(std::string(what) + ": frame shapes differ");
}

Index frame_count(const QTensor& t) {
    if (t.order() == 2) return 1;
    if (t.order() == 3) return t.dim(2);
    throw std::invalid_argument("metrics: expected a 2- or 3-mode tensor");
}

}  // namespace

QMat frame_of(const QTensor& t, Index f) {
    if (t.order() == 3) return t.frontal_slice(f);
    if (t.order() != 2 || f != 0) throw std::invalid_argument("frame_of: no such frame");
    QMat m(t.dim(0), t.dim(1));
    for (int c = 0; c < 4; ++c) m.part(c) = t.part(c).reshaped(t.dim(0), t.dim(1));
    return m;
}

double psnr(const QMat& ref, const QMat& rec) {
    check_same(ref, rec, "psnr");
    double sse = 0.0;
    for (int c = 1; c < 4; ++c) sse += (ref.part(c) - rec.part(c)).squaredNorm();
    const double mse = sse / (3.0 * static_cast<double>(ref.size()));
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

Eigen::MatrixXd luminance(const QMat& frame) {
    return 0.299 * frame.x() + 0.587 * frame.y() + 0.114 * frame.z();
}

double ssim(const QMat& ref, const QMat& rec) {
    check_same(ref, rec, "ssim");
    if (ref.rows() < kWindow || ref.cols() < kWindow)
        throw std::invalid_argument("ssim: frame smaller than the 8x8 window");
    const Eigen::MatrixXd a = luminance(ref);
    const Eigen::MatrixXd b = luminance(rec);
    const double c1 = (0.01 * 255.0) * (0.01 * 255.0);
    const double c2 = (0.03 * 255.0) * (0.03 * 255.0);
    const double n = kWindow * kWindow;

    double total = 0.0;
    Index count = 0;
    for (Index j = 0; j + kWindow <= a.cols(); ++j)
        for (Index i = 0; i + kWindow <= a.rows(); ++i) {
            const auto wa = a.block(i, j, kWindow, kWindow);
            const auto wb = b.block(i, j, kWindow, kWindow);
            const double ma = wa.sum() / n;
            const double mb = wb.sum() / n;
            const double va = (wa.array() - ma).square().sum() / n;
            const double vb = (wb.array() - mb).square().sum() / n;
            const double cov = ((wa.array() - ma) * (wb.array() - mb)).sum() / n;
            total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
            ++count;
        }
    return total / static_cast<double>(count);
}

double rel_error(const QTensor& ref, const QTensor& rec) {
    if (ref.dims() != rec.dims()) throw std::invalid_argument("rel_error: dimension mismatch");
    const double r = ref.norm_fro();
    if (r == 0.0) throw std::invalid_argument("rel_error: zero reference");
    return (rec - ref).norm_fro() / r;
}

QualityReport evaluate(const QTensor& ref, const QTensor& rec) {
    if (ref.dims() != rec.dims()) throw std::invalid_argument("evaluate: dimension mismatch");
    QualityReport q;
    const Index frames = frame_count(ref);
    for (Index f = 0; f < frames; ++f) {
        const QMat a = frame_of(ref, f);
        const QMat b = frame_of(rec, f);
        q.psnr.push_back(psnr(a, b));
        q.ssim.push_back(ssim(a, b));
    }
    for (std::size_t f = 0; f < q.psnr.size(); ++f) {
        q.mean_psnr += q.psnr[f];
        q.mean_ssim += q.ssim[f];
    }
    q.mean_psnr /= static_cast<double>(frames);
    q.mean_ssim /= static_cast<double>(frames);
    q.rel_error = ref.norm_fro() > 0.0 ? rel_error(ref, rec) : (rec.norm_fro() == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    return q;
}

}  // namespace qtc
