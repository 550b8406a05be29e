#include "cyborg/world.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cyborg {

double norm(Vec2 v) { return std::hypot(v.x, v.y); }

double distance(Vec2 a, Vec2 b) { return norm(a - b); }

double normalize_angle(double deg) {
    if (!std::isfinite(deg)) {
        throw std::invalid_argument("normalize_angle: non-finite angle");
    }
    double r = std::fmod(deg, 360.0);
    if (r <= -180.0) r += 360.0;
    if (r > 180.0) r -= 360.0;
    return r;
}

double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

Vec2 heading_vector(double yaw_deg) {
    const double r = deg2rad(yaw_deg);
    return {std::cos(r), std::sin(r)};
}

Arena::Arena(double w, double h, double slope_deg) : width(w), height(h), slope(slope_deg) {
    if (!(w > 0.0) || !(h > 0.0)) {
        throw std::invalid_argument("arena dimensions must be positive");
    }
}

bool Arena::contains(Vec2 p) const {
    return p.x >= 0.0 && p.x <= width && p.y >= 0.0 && p.y <= height;
}

Vec2 Arena::clamp(Vec2 p) const {
    return {std::clamp(p.x, 0.0, width), std::clamp(p.y, 0.0, height)};
}

double distance_to_nearest_wall(const Arena& arena, Vec2 p) {
    const double d = std::min({p.x, arena.width - p.x, p.y, arena.height - p.y});
    return std::max(0.0, d);
}

Vec2 inward_wall_normal(const Arena& arena, Vec2 p, double tie_eps) {
    const double d[4] = {p.x, arena.width - p.x, p.y, arena.height - p.y};
    const Vec2 n[4] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    const double dmin = *std::min_element(d, d + 4);
    Vec2 sum;
    for (int i = 0; i < 4; ++i) {
        if (d[i] <= dmin + tie_eps) sum = sum + n[i];
    }
    const double len = norm(sum);
    return len > 0.0 ? (1.0 / len) * sum : Vec2{1, 0};
}

std::string_view to_string(SourceKind kind) {
    switch (kind) {
        case SourceKind::Human: return "human";
        case SourceKind::Oven: return "oven";
        case SourceKind::TransientAir: return "transient_air";
        case SourceKind::Fixture: return "fixture";
    }
    return "unknown";
}

SourceKind source_kind_from_string(std::string_view s) {
    if (s == "human") return SourceKind::Human;
    if (s == "oven") return SourceKind::Oven;
    if (s == "transient_air") return SourceKind::TransientAir;
    if (s == "fixture") return SourceKind::Fixture;
    throw std::invalid_argument("unknown source kind: " + std::string(s));
}

bool ThermalSource::active_at(double t) const {
    if (active_from && t < *active_from) return false;
    if (active_to && t >= *active_to) return false;
    return true;
}

ThermalSource make_human(Vec2 center) {
    ThermalSource s;
    s.kind = SourceKind::Human;
    s.center = center;
    s.radius = 0.25;
    s.height = 1.0;
    s.surface_temp = 33.0;
    return s;
}

ThermalSource make_oven(Vec2 center, double surface_temp) {
    ThermalSource s;
    s.kind = SourceKind::Oven;
    s.center = center;
    s.radius = 0.3;
    s.height = 0.5;
    s.surface_temp = surface_temp;
    return s;
}

void World::validate() const {
    for (const auto& s : sources) {
        if (!(s.radius > 0.0) || !(s.height > 0.0)) {
            throw std::invalid_argument("thermal source radius and height must be positive");
        }
        if (s.surface_temp < ambient) {
            throw std::invalid_argument("thermal source colder than ambient");
        }
        if (s.kind == SourceKind::TransientAir && !(s.active_from && s.active_to)) {
            throw std::invalid_argument("transient source requires an active interval");
        }
    }
}

namespace {
std::size_t cell_count(double extent, double cell) {
    return static_cast<std::size_t>(std::ceil(extent / cell - 1e-9));
}
}  // namespace

CoverageGrid::CoverageGrid(double width, double height, double cell_size)
    : width_(width), height_(height), cell_size_(cell_size) {
    if (!(width > 0.0) || !(height > 0.0) || !(cell_size > 0.0)) {
        throw std::invalid_argument("coverage grid dimensions must be positive");
    }
    cols_ = cell_count(width, cell_size);
    rows_ = cell_count(height, cell_size);
    cells_.assign(cols_ * rows_, false);
}

void CoverageGrid::mark(const Pose& pose) { mark(pose.position()); }

void CoverageGrid::mark(Vec2 p) {
    if (!(p.x >= 0.0 && p.x <= width_ && p.y >= 0.0 && p.y <= height_)) {
        throw OutOfBoundsError("coverage mark outside grid");
    }
    const auto col = std::min(cols_ - 1, static_cast<std::size_t>(p.x / cell_size_));
    const auto row = std::min(rows_ - 1, static_cast<std::size_t>(p.y / cell_size_));
    auto ref = cells_[row * cols_ + col];
    if (!ref) {
        ref = true;
        ++visited_count_;
    }
}

bool CoverageGrid::visited(std::size_t col, std::size_t row) const {
    return cells_.at(row * cols_ + col);
}

double CoverageGrid::fraction() const {
    return static_cast<double>(visited_count_) / static_cast<double>(total_cells());
}

}  // namespace cyborg
