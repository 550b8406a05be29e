#pragma once

#include <array>
#include <optional>

#include "cyborg/grid.hpp"
#include "cyborg/ir_camera.hpp"
#include "cyborg/world.hpp"

namespace cyborg {

/// One Gaussian smoothing level of the blob detector.
struct BlobScale {
    int size;
    double sigma;
};

/// Detector scales, ordered from smallest kernel to largest (the order
/// used for tie-breaking).
inline constexpr std::array<BlobScale, 3> kBlobScales{{{21, 3.0}, {27, 4.0}, {33, 5.0}}};

struct BlobParams {
    /// Expected frame noise; sets the nomination threshold.
    double noise_sd = 0.3;
    /// Threshold is -noise_k * noise_sd * (operator noise gain).
    double noise_k = 5.0;
    /// Compare sigma^2-normalized responses across scales instead of raw.
    bool scale_normalized = false;
    /// Responses must be below -min_response even for noise-free frames.
    double min_response = 1e-6;
};

struct BlobResult {
    int u = 0;  // column, 1..32
    int v = 0;  // row, 1..32
    double response = 0.0;
    /// Gaussian kernel size of the winning scale (21, 27 or 33).
    int scale = 0;
};

/// 3x3 median with replicate padding.
Grid median3(const Grid& img);

/// Sampled Gaussian of odd `size`; the centre weight before normalisation
/// is 1 / (2 pi sigma^2).
Grid gaussian_kernel(int size, double sigma, bool normalize = true);

/// Convolution with the normalized sampled Gaussian, replicate padding.
Grid gaussian_smooth(const Grid& img, int size, double sigma);

/// 4-neighbour Laplacian [[0,1,0],[1,-4,1],[0,1,0]], replicate padding.
Grid laplacian3(const Grid& img);

/// Root-sum-square of the combined Gaussian+Laplacian weights: the
/// standard deviation of the response to unit white noise, per pixel.
/// Replicate padding makes the border gains larger than the interior.
const Grid& blob_noise_gain(const BlobScale& scale);

/// Per-pixel nomination threshold (negative).
Grid nomination_threshold(const BlobScale& scale, const BlobParams& params);

/// Response map at one scale (median filter not included).
Grid blob_response(const Grid& filtered, const BlobScale& scale, const BlobParams& params);

/// Median filter, then per scale: smooth, Laplacian, local minima below
/// the nomination threshold; returns the lowest response overall. Ties go
/// to the smaller kernel, then row-major order.
std::optional<BlobResult> detect_blob(const IrImage& img, const BlobParams& params = {});

/// Horizontal angle of column u within the 90 degree field of view:
/// (u - 1) * 90 / 31. Throws std::out_of_range outside [1, 32].
double pixel_to_angle(int u);

struct TargetEstimate {
    double x = 0.0;
    double y = 0.0;
    /// Bearing of the estimate in the world frame, degrees.
    double upsilon = 0.0;
    double alpha = 0.0;
    double step = 0.0;

    Vec2 position() const { return {x, y}; }
};

/// Projects a target `step` metres from the insect along
/// yaw - 45 + alpha. Throws std::invalid_argument unless
/// alpha is in [0, 90] and step > 0.
TargetEstimate estimate_target(const Pose& insect, double alpha_deg, double step);

/// Angle to feed estimate_target for a blob in column u. Column 1 is the
/// left edge of the rendered view, while the projection formula measures
/// alpha from the right edge, so the column is mirrored first.
double column_to_estimate_angle(int u);

}  // namespace cyborg
