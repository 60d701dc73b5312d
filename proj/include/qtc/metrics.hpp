#pragma once

#include <limits>
#include <vector>

#include "qtc/qtensor.hpp"

namespace qtc {

/// 10 log10(255^2 / MSE) over all pixels and the i, j, k channels. +inf when
/// the frames are identical.
double psnr(const QMat& ref, const QMat& rec);

/// Mean SSIM over every 8x8 window (stride 1, uniform weights, population
/// moments) of the luminance 0.299 R + 0.587 G + 0.114 B, with
/// C1 = (0.01 * 255)^2 and C2 = (0.03 * 255)^2.
double ssim(const QMat& ref, const QMat& rec);

/// ||rec - ref||_F / ||ref||_F.
double rel_error(const QTensor& ref, const QTensor& rec);

/// Luminance of a pure-quaternion colour frame.
Eigen::MatrixXd luminance(const QMat& frame);

struct QualityReport {
    std::vector<double> psnr;  // per frame, dB
    std::vector<double> ssim;  // per frame
    double mean_psnr = 0.0;
    double mean_ssim = 0.0;
    double rel_error = 0.0;
};

/// Frame-wise evaluation of two rows x cols x frames tensors (a 2-mode tensor
/// is one frame).
QualityReport evaluate(const QTensor& ref, const QTensor& rec);

/// Frame f of a 2- or 3-mode tensor.
QMat frame_of(const QTensor& t, Index f);

}  // namespace qtc
