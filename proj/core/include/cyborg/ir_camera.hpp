#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "cyborg/grid.hpp"
#include "cyborg/rng.hpp"
#include "cyborg/world.hpp"

namespace cyborg {

inline constexpr int kIrSide = 32;
inline constexpr int kIrPixels = kIrSide * kIrSide;

/// 32x32 thermal frame in degrees Celsius. Pixel coordinates are 1-based:
/// u is the column (u = 1 at the left edge of the view), v the row (v = 1
/// at the top).
struct IrImage {
    Grid temps{kIrSide, kIrSide, 0.0};
    double timestamp = 0.0;

    IrImage() = default;
    explicit IrImage(double fill, double t = 0.0) : temps(kIrSide, kIrSide, fill), timestamp(t) {}

    double& at(int u, int v) { return temps(static_cast<std::size_t>(v - 1), static_cast<std::size_t>(u - 1)); }
    double at(int u, int v) const { return temps(static_cast<std::size_t>(v - 1), static_cast<std::size_t>(u - 1)); }
};

struct CameraModel {
    double h_fov = 90.0;
    double v_fov = 90.0;
    /// Lens height above the floor, metres.
    double height = 0.02;
    double rate_hz = 1.0;
    double noise_sd = 0.3;
    double max_range = 12.0;
    /// Apparent excess temperature falls off as min(1, (ref/d)^2).
    double attenuation_ref = 3.0;

    void validate() const;
    double period() const { return 1.0 / rate_hz; }
};

/// Horizontal angle of column u, positive to the left of the heading.
double column_bearing_offset(int u, const CameraModel& cam);
/// Elevation of row v, positive above the horizon.
double row_elevation(int v, const CameraModel& cam);

/// Renders the frame seen from `pose` at time `t`. Each pixel takes the
/// attenuated surface temperature of the nearest active source its centre
/// ray hits, otherwise ambient; Gaussian noise (truncated at 3 sd) is
/// added when cam.noise_sd > 0.
IrImage render_ir(const World& world, const Pose& pose, const CameraModel& cam, Rng& rng,
                  double t = 0.0);

/// Noise-free render; no random draws.
IrImage render_ir_clean(const World& world, const Pose& pose, const CameraModel& cam,
                        double t = 0.0);

/// Number of pixels with lo <= T <= hi.
int in_band_count(const IrImage& img, double lo, double hi);

/// Fraction of the 1024 pixels with lo <= T <= hi. Requires lo < hi.
double thermal_fraction(const IrImage& img, double lo, double hi);

/// In-band pixels inside the 5x5 window centred on (u, v), clipped at the
/// image border. Throws std::out_of_range if the centre is off-image.
int center_window_count(const IrImage& img, int u, int v, double lo, double hi);

// Frame export/import.

void write_ir_csv(std::ostream& os, const IrImage& img);
IrImage read_ir_csv(std::istream& is);

/// Binary PGM (P5) with a "# celsius <lo> <hi>" header comment; pixel
/// values map [lo, hi] linearly onto 0..255.
void write_ir_pgm(std::ostream& os, const IrImage& img, double lo, double hi);
/// Reads a P5/P2 frame; the header comment range is used when present,
/// otherwise [default_lo, default_hi].
IrImage read_ir_pgm(std::istream& is, double default_lo = 20.0, double default_hi = 40.0);

/// Dispatches on the extension (.csv or .pgm).
IrImage load_ir_frame(const std::filesystem::path& path);

}  // namespace cyborg
