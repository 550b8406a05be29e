#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "cyborg/harness.hpp"

namespace cyborg {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    /// Optional symmetric error bars, same length as y.
    std::vector<double> err;
};

struct ChartOptions {
    std::string title;
    std::string x_label;
    std::string y_label;
    double y_min = 0.0;
    double y_max = 1.0;
    /// Values outside [y_min, y_max] are drawn at the bound.
    bool clip = true;
};

std::string svg_line_chart(const std::vector<Series>& series, const ChartOptions& opt);

struct Circle {
    Vec2 center;
    double radius = 0.0;
    std::string css_class;
};

/// Top-down arena view: one polyline per entry of `paths`.
std::string svg_trajectories(const Arena& arena, const std::vector<std::vector<Vec2>>& paths,
                             const std::vector<Circle>& circles, const std::string& title);

std::string svg_coverage(const ExplorationSummary& s);
std::string svg_search_times(const ExplorationSummary& s);
std::string svg_thermal_trajectories(const ThermalNavSummary& s);
std::string svg_arrival_distances(const ThermalNavSummary& s);
std::string svg_imu_errors(const ImuStudySummary& s);
std::string svg_mission_trajectories(const MissionStudySummary& s);

/// Writes the SVG panels for a summary. Throws std::invalid_argument for
/// an empty trial set (nothing is written).
std::vector<std::filesystem::path> emit_plots(const ExplorationSummary& s, const std::filesystem::path& dir);
std::vector<std::filesystem::path> emit_plots(const ThermalNavSummary& s, const std::filesystem::path& dir);
std::vector<std::filesystem::path> emit_plots(const ImuStudySummary& s, const std::filesystem::path& dir);
std::vector<std::filesystem::path> emit_plots(const MissionStudySummary& s, const std::filesystem::path& dir);

}  // namespace cyborg
