#include "cyborg/ir_camera.hpp"

#include <fmt/format.h>
#include <fmt/ostream.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace cyborg {

void CameraModel::validate() const {
    if (!(h_fov > 0.0 && h_fov < 180.0) || !(v_fov > 0.0 && v_fov < 180.0)) {
        throw std::invalid_argument("camera field of view must lie in (0, 180)");
    }
    if (!(rate_hz > 0.0)) throw std::invalid_argument("camera rate must be positive");
    if (noise_sd < 0.0 || !(max_range > 0.0) || !(attenuation_ref > 0.0) || height < 0.0) {
        throw std::invalid_argument("invalid camera parameters");
    }
}

double column_bearing_offset(int u, const CameraModel& cam) {
    return cam.h_fov / 2.0 - (u - 1) * cam.h_fov / (kIrSide - 1);
}

double row_elevation(int v, const CameraModel& cam) {
    return cam.v_fov / 2.0 - (v - 1) * cam.v_fov / (kIrSide - 1);
}

namespace {

// Horizontal distance along unit direction (dx, dy) from `o` to the first
// point of the circle; 0 when starting inside, negative when missed.
double ray_circle(Vec2 o, double dx, double dy, Vec2 c, double r) {
    const double ox = o.x - c.x, oy = o.y - c.y;
    const double cc = ox * ox + oy * oy - r * r;
    if (cc <= 0.0) return 0.0;
    const double b = ox * dx + oy * dy;
    if (b >= 0.0) return -1.0;
    const double disc = b * b - cc;
    if (disc < 0.0) return -1.0;
    return -b - std::sqrt(disc);
}

double pixel_temperature(const World& world, const Pose& pose, const CameraModel& cam, int u,
                         int v, double t) {
    const double psi = deg2rad(pose.yaw + column_bearing_offset(u, cam));
    const double elev = deg2rad(row_elevation(v, cam));
    const double dx = std::cos(psi), dy = std::sin(psi);
    const double tan_e = std::tan(elev);
    const double cos_e = std::cos(elev);
    const double floor_hit = elev < 0.0 ? cam.height / -tan_e : std::numeric_limits<double>::infinity();

    double best = std::numeric_limits<double>::infinity();
    const ThermalSource* hit = nullptr;
    for (const auto& src : world.sources) {
        if (!src.active_at(t)) continue;
        const double s = ray_circle(pose.position(), dx, dy, src.center, src.radius);
        if (s < 0.0 || s >= best || s > floor_hit) continue;
        const double z = cam.height + s * tan_e;
        if (z < 0.0 || z > src.height) continue;
        best = s;
        hit = &src;
    }
    if (!hit) return world.ambient;
    const double range = best / cos_e;
    if (range > cam.max_range) return world.ambient;
    const double gain = range <= cam.attenuation_ref
                            ? 1.0
                            : (cam.attenuation_ref / range) * (cam.attenuation_ref / range);
    return world.ambient + (hit->surface_temp - world.ambient) * gain;
}

}  // namespace

IrImage render_ir_clean(const World& world, const Pose& pose, const CameraModel& cam, double t) {
    IrImage img(world.ambient, t);
    for (int v = 1; v <= kIrSide; ++v) {
        for (int u = 1; u <= kIrSide; ++u) {
            img.at(u, v) = pixel_temperature(world, pose, cam, u, v, t);
        }
    }
    return img;
}

IrImage render_ir(const World& world, const Pose& pose, const CameraModel& cam, Rng& rng,
                  double t) {
    IrImage img = render_ir_clean(world, pose, cam, t);
    if (cam.noise_sd > 0.0) {
        const double cap = 3.0 * cam.noise_sd;
        for (double& x : img.temps.values()) {
            x += std::clamp(rng.normal(0.0, cam.noise_sd), -cap, cap);
        }
    }
    return img;
}

int in_band_count(const IrImage& img, double lo, double hi) {
    return static_cast<int>(std::count_if(img.temps.values().begin(), img.temps.values().end(),
                                          [&](double x) { return x >= lo && x <= hi; }));
}

double thermal_fraction(const IrImage& img, double lo, double hi) {
    if (!(lo < hi)) throw std::invalid_argument("thermal_fraction: requires lo < hi");
    return static_cast<double>(in_band_count(img, lo, hi)) / kIrPixels;
}

int center_window_count(const IrImage& img, int u, int v, double lo, double hi) {
    if (u < 1 || u > kIrSide || v < 1 || v > kIrSide) {
        throw std::out_of_range("center_window_count: centre outside image");
    }
    int n = 0;
    for (int vv = std::max(1, v - 2); vv <= std::min(kIrSide, v + 2); ++vv) {
        for (int uu = std::max(1, u - 2); uu <= std::min(kIrSide, u + 2); ++uu) {
            const double x = img.at(uu, vv);
            if (x >= lo && x <= hi) ++n;
        }
    }
    return n;
}

void write_ir_csv(std::ostream& os, const IrImage& img) {
    for (int v = 1; v <= kIrSide; ++v) {
        for (int u = 1; u <= kIrSide; ++u) {
            if (u > 1) os << ',';
            fmt::print(os, "{:.3f}", img.at(u, v));
        }
        os << '\n';
    }
}

IrImage read_ir_csv(std::istream& is) {
    IrImage img;
    std::string line;
    int v = 0;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (++v > kIrSide) throw std::runtime_error(fmt::format("line {}: more than 32 rows", lineno));
        std::stringstream ss(line);
        std::string cell;
        int u = 0;
        while (std::getline(ss, cell, ',')) {
            if (++u > kIrSide) break;
            try {
                std::size_t used = 0;
                img.at(u, v) = std::stod(cell, &used);
            } catch (const std::exception&) {
                throw std::runtime_error(fmt::format("line {}: bad value '{}'", lineno, cell));
            }
        }
        if (u != kIrSide) {
            throw std::runtime_error(fmt::format("line {}: expected 32 columns, got {}", lineno, u));
        }
    }
    if (v != kIrSide) throw std::runtime_error(fmt::format("expected 32 rows, got {}", v));
    return img;
}

void write_ir_pgm(std::ostream& os, const IrImage& img, double lo, double hi) {
    if (!(lo < hi)) throw std::invalid_argument("write_ir_pgm: requires lo < hi");
    fmt::print(os, "P5\n# celsius {} {}\n{} {}\n255\n", lo, hi, kIrSide, kIrSide);
    for (int v = 1; v <= kIrSide; ++v) {
        for (int u = 1; u <= kIrSide; ++u) {
            const double s = (img.at(u, v) - lo) / (hi - lo) * 255.0;
            os.put(static_cast<char>(static_cast<unsigned char>(std::lround(std::clamp(s, 0.0, 255.0)))));
        }
    }
}

IrImage read_ir_pgm(std::istream& is, double default_lo, double default_hi) {
    double lo = default_lo, hi = default_hi;
    auto next_token = [&]() {
        std::string tok;
        for (;;) {
            int c = is.peek();
            if (c == EOF) break;
            if (c == '#') {
                std::string comment;
                std::getline(is, comment);
                std::istringstream cs(comment.substr(1));
                std::string key;
                double a, b;
                if (cs >> key >> a >> b && key == "celsius") {
                    lo = a;
                    hi = b;
                }
                continue;
            }
            if (std::isspace(c)) {
                is.get();
                if (!tok.empty()) break;
                continue;
            }
            tok.push_back(static_cast<char>(is.get()));
        }
        return tok;
    };
    const std::string magic = next_token();
    if (magic != "P5" && magic != "P2") throw std::runtime_error("not a PGM file");
    const int w = std::stoi(next_token());
    const int h = std::stoi(next_token());
    const int maxval = std::stoi(next_token());
    if (w != kIrSide || h != kIrSide) throw std::runtime_error("PGM frame must be 32x32");
    if (maxval <= 0 || maxval > 255) throw std::runtime_error("unsupported PGM maxval");
    IrImage img;
    for (int v = 1; v <= kIrSide; ++v) {
        for (int u = 1; u <= kIrSide; ++u) {
            int raw;
            if (magic == "P5") {
                const int c = is.get();
                if (c == EOF) throw std::runtime_error("truncated PGM data");
                raw = c;
            } else {
                raw = std::stoi(next_token());
            }
            img.at(u, v) = lo + (hi - lo) * raw / static_cast<double>(maxval);
        }
    }
    return img;
}

IrImage load_ir_frame(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open frame: " + path.string());
    if (path.extension() == ".pgm") return read_ir_pgm(in);
    return read_ir_csv(in);
}

}  // namespace cyborg
