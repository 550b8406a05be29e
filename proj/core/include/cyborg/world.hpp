#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cyborg {

/// Raised when a position falls outside the arena.
class OutOfBoundsError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
    friend bool operator==(Vec2, Vec2) = default;
};

double norm(Vec2 v);
double distance(Vec2 a, Vec2 b);

/// Wraps an angle in degrees to (-180, 180]. Throws std::invalid_argument
/// for NaN or infinite input.
double normalize_angle(double deg);

double deg2rad(double deg);
double rad2deg(double rad);

/// Unit vector at `yaw_deg`, counter-clockwise from +x.
Vec2 heading_vector(double yaw_deg);

/// Agent pose in the world frame: +x right, +y up, yaw counter-clockwise
/// from +x in degrees.
struct Pose {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;
    double yaw = 0.0;
    double pitch = 0.0;
    double roll = 0.0;

    Vec2 position() const { return {x, y}; }
    void set_position(Vec2 p) {
        x = p.x;
        y = p.y;
    }
};

/// Axis-aligned arena [0, width] x [0, height], bounded by walls.
struct Arena {
    double width = 20.0;
    double height = 20.0;
    /// Incline of the floor in degrees; only used when replaying 3D walks.
    double slope = 0.0;

    Arena() = default;
    Arena(double w, double h, double slope_deg = 0.0);

    bool contains(Vec2 p) const;
    Vec2 clamp(Vec2 p) const;
};

/// Minimum distance from `p` to the four boundary segments.
double distance_to_nearest_wall(const Arena& arena, Vec2 p);
inline double distance_to_nearest_wall(const Arena& arena, const Pose& pose) {
    return distance_to_nearest_wall(arena, pose.position());
}

/// Inward unit normal of the closest wall; at a corner within `tie_eps`
/// of two walls the normals are summed and renormalized.
Vec2 inward_wall_normal(const Arena& arena, Vec2 p, double tie_eps = 1e-9);

enum class SourceKind { Human, Oven, TransientAir, Fixture };

std::string_view to_string(SourceKind kind);
SourceKind source_kind_from_string(std::string_view s);

/// A heat emitter, modelled as an upright cylinder standing on the floor.
struct ThermalSource {
    SourceKind kind = SourceKind::Human;
    Vec2 center;
    double radius = 0.25;
    double height = 1.0;
    double surface_temp = 33.0;
    /// Active window [start, end) in seconds; unbounded when absent.
    std::optional<double> active_from;
    std::optional<double> active_to;

    bool active_at(double t) const;
};

ThermalSource make_human(Vec2 center);
ThermalSource make_oven(Vec2 center, double surface_temp = 36.0);

struct World {
    Arena arena;
    std::vector<ThermalSource> sources;
    double ambient = 25.0;

    /// Throws std::invalid_argument when a source violates its invariants.
    void validate() const;
};

/// Visited-cell bitmap over a rectangular region of the floor.
class CoverageGrid {
public:
    /// Covers [0, width] x [0, height] with square cells of `cell_size`.
    CoverageGrid(double width, double height, double cell_size = 0.1);
    explicit CoverageGrid(const Arena& arena, double cell_size = 0.1)
        : CoverageGrid(arena.width, arena.height, cell_size) {}

    /// Sets the cell under the body centre. Throws OutOfBoundsError when
    /// the pose lies outside the grid.
    void mark(const Pose& pose);
    void mark(Vec2 p);

    bool visited(std::size_t col, std::size_t row) const;
    double fraction() const;

    std::size_t cols() const { return cols_; }
    std::size_t rows() const { return rows_; }
    std::size_t total_cells() const { return cols_ * rows_; }
    std::size_t visited_cells() const { return visited_count_; }
    double cell_size() const { return cell_size_; }

private:
    double width_;
    double height_;
    double cell_size_;
    std::size_t cols_;
    std::size_t rows_;
    std::vector<bool> cells_;
    std::size_t visited_count_ = 0;
};

inline CoverageGrid mark_coverage(CoverageGrid grid, const Pose& pose) {
    grid.mark(pose);
    return grid;
}

inline double coverage_fraction(const CoverageGrid& grid) { return grid.fraction(); }

}  // namespace cyborg
