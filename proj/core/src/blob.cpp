#include "cyborg/blob.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace cyborg {

Grid median3(const Grid& img) {
    Grid out(img.rows(), img.cols());
    std::array<double, 9> win{};
    for (long r = 0; r < static_cast<long>(img.rows()); ++r) {
        for (long c = 0; c < static_cast<long>(img.cols()); ++c) {
            int k = 0;
            for (long dr = -1; dr <= 1; ++dr)
                for (long dc = -1; dc <= 1; ++dc) win[k++] = img.clamped(r + dr, c + dc);
            std::nth_element(win.begin(), win.begin() + 4, win.end());
            out(r, c) = win[4];
        }
    }
    return out;
}

namespace {

std::vector<double> gaussian_1d(int size, double sigma) {
    if (size < 1 || size % 2 == 0 || !(sigma > 0.0)) {
        throw std::invalid_argument("gaussian kernel needs odd size and sigma > 0");
    }
    const int half = size / 2;
    std::vector<double> k(size);
    double sum = 0.0;
    for (int i = 0; i < size; ++i) {
        const double x = i - half;
        k[i] = std::exp(-x * x / (2.0 * sigma * sigma));
        sum += k[i];
    }
    for (double& w : k) w /= sum;
    return k;
}

}  // namespace

Grid gaussian_kernel(int size, double sigma, bool normalize) {
    if (size < 1 || size % 2 == 0 || !(sigma > 0.0)) {
        throw std::invalid_argument("gaussian kernel needs odd size and sigma > 0");
    }
    const int half = size / 2;
    Grid k(size, size);
    double sum = 0.0;
    const double norm = 1.0 / (2.0 * std::numbers::pi * sigma * sigma);
    for (int r = 0; r < size; ++r) {
        for (int c = 0; c < size; ++c) {
            const double y = r - half, x = c - half;
            k(r, c) = norm * std::exp(-(x * x + y * y) / (2.0 * sigma * sigma));
            sum += k(r, c);
        }
    }
    if (normalize) {
        for (double& w : k.values()) w /= sum;
    }
    return k;
}

Grid gaussian_smooth(const Grid& img, int size, double sigma) {
    const auto k = gaussian_1d(size, sigma);
    const long half = size / 2;
    const long rows = static_cast<long>(img.rows()), cols = static_cast<long>(img.cols());
    Grid tmp(img.rows(), img.cols());
    for (long r = 0; r < rows; ++r) {
        for (long c = 0; c < cols; ++c) {
            double acc = 0.0;
            for (long j = -half; j <= half; ++j) acc += k[j + half] * img.clamped(r, c + j);
            tmp(r, c) = acc;
        }
    }
    Grid out(img.rows(), img.cols());
    for (long r = 0; r < rows; ++r) {
        for (long c = 0; c < cols; ++c) {
            double acc = 0.0;
            for (long i = -half; i <= half; ++i) acc += k[i + half] * tmp.clamped(r + i, c);
            out(r, c) = acc;
        }
    }
    return out;
}

Grid laplacian3(const Grid& img) {
    Grid out(img.rows(), img.cols());
    for (long r = 0; r < static_cast<long>(img.rows()); ++r) {
        for (long c = 0; c < static_cast<long>(img.cols()); ++c) {
            out(r, c) = img.clamped(r - 1, c) + img.clamped(r + 1, c) + img.clamped(r, c - 1) +
                        img.clamped(r, c + 1) - 4.0 * img.clamped(r, c);
        }
    }
    return out;
}

const Grid& blob_noise_gain(const BlobScale& scale) {
    static std::mutex mu;
    static std::map<int, Grid> cache;
    std::lock_guard lock(mu);
    if (auto it = cache.find(scale.size); it != cache.end()) return it->second;

    // The smoothing + Laplacian chain is linear, so each output pixel is a
    // weighted sum of input pixels; accumulate the squared weights one
    // impulse at a time.
    Grid ss(kIrSide, kIrSide, 0.0);
    Grid impulse(kIrSide, kIrSide, 0.0);
    for (std::size_t r = 0; r < kIrSide; ++r) {
        for (std::size_t c = 0; c < kIrSide; ++c) {
            impulse(r, c) = 1.0;
            const Grid resp = laplacian3(gaussian_smooth(impulse, scale.size, scale.sigma));
            for (std::size_t i = 0; i < ss.values().size(); ++i) {
                ss.values()[i] += resp.values()[i] * resp.values()[i];
            }
            impulse(r, c) = 0.0;
        }
    }
    for (double& x : ss.values()) x = std::sqrt(x);
    return cache.emplace(scale.size, std::move(ss)).first->second;
}

Grid nomination_threshold(const BlobScale& scale, const BlobParams& params) {
    Grid t = blob_noise_gain(scale);
    const double s2 = params.scale_normalized ? scale.sigma * scale.sigma : 1.0;
    for (double& x : t.values()) x = -std::max(params.noise_k * params.noise_sd * x * s2, params.min_response);
    return t;
}

Grid blob_response(const Grid& filtered, const BlobScale& scale, const BlobParams& params) {
    Grid resp = laplacian3(gaussian_smooth(filtered, scale.size, scale.sigma));
    if (params.scale_normalized) {
        const double s2 = scale.sigma * scale.sigma;
        for (double& x : resp.values()) x *= s2;
    }
    return resp;
}

std::optional<BlobResult> detect_blob(const IrImage& img, const BlobParams& params) {
    const Grid filtered = median3(img.temps);
    std::optional<BlobResult> best;
    for (const auto& scale : kBlobScales) {
        const Grid resp = blob_response(filtered, scale, params);
        const Grid thresh = nomination_threshold(scale, params);
        const long rows = static_cast<long>(resp.rows()), cols = static_cast<long>(resp.cols());
        for (long r = 0; r < rows; ++r) {
            for (long c = 0; c < cols; ++c) {
                const double x = resp(r, c);
                if (!(x < thresh(r, c))) continue;
                if (best && !(x < best->response)) continue;
                bool is_min = true;
                for (long dr = -1; dr <= 1 && is_min; ++dr) {
                    for (long dc = -1; dc <= 1; ++dc) {
                        const long rr = r + dr, cc = c + dc;
                        if ((dr == 0 && dc == 0) || rr < 0 || cc < 0 || rr >= rows || cc >= cols) continue;
                        if (resp(rr, cc) < x) {
                            is_min = false;
                            break;
                        }
                    }
                }
                if (is_min) {
                    best = BlobResult{static_cast<int>(c) + 1, static_cast<int>(r) + 1, x, scale.size};
                }
            }
        }
    }
    return best;
}

double pixel_to_angle(int u) {
    if (u < 1 || u > kIrSide) throw std::out_of_range("pixel_to_angle: u outside [1, 32]");
    return (u - 1) * 90.0 / 31.0;
}

TargetEstimate estimate_target(const Pose& insect, double alpha_deg, double step) {
    if (!(alpha_deg >= 0.0 && alpha_deg <= 90.0)) {
        throw std::invalid_argument("estimate_target: alpha outside [0, 90]");
    }
    if (!(step > 0.0)) throw std::invalid_argument("estimate_target: step must be positive");
    TargetEstimate e;
    e.alpha = alpha_deg;
    e.step = step;
    e.upsilon = insect.yaw - 45.0 + alpha_deg;
    const double rad = deg2rad(e.upsilon);
    e.x = insect.x + step * std::cos(rad);
    e.y = insect.y + step * std::sin(rad);
    return e;
}

double column_to_estimate_angle(int u) { return pixel_to_angle(kIrSide + 1 - u); }

}  // namespace cyborg
