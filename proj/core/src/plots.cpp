#include "cyborg/plots.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace cyborg {

namespace {

constexpr double kW = 640.0;
constexpr double kH = 420.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 150.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string color(std::size_t i) { return kPalette[i % std::size(kPalette)]; }

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string header(double w, double h) {
    return fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" viewBox=\"0 0 {:.0f} {:.0f}\" "
        "font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
        w, h, w, h);
}

std::string tick_label(double v) {
    if (std::abs(v - std::round(v)) < 1e-9) return fmt::format("{:.0f}", v);
    return fmt::format("{:.2g}", v);
}

}  // namespace

std::string svg_line_chart(const std::vector<Series>& series, const ChartOptions& opt) {
    if (!(opt.y_max > opt.y_min)) throw std::invalid_argument("chart y range is empty");
    double x_min = 0.0, x_max = 1.0;
    bool first = true;
    for (const auto& s : series) {
        if (s.x.size() != s.y.size() || (!s.err.empty() && s.err.size() != s.y.size())) {
            throw std::invalid_argument("series lengths differ");
        }
        for (double x : s.x) {
            if (first) x_min = x_max = x;
            x_min = std::min(x_min, x);
            x_max = std::max(x_max, x);
            first = false;
        }
    }
    if (x_max <= x_min) x_max = x_min + 1.0;

    const double pw = kW - kLeft - kRight;
    const double ph = kH - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x - x_min) / (x_max - x_min) * pw; };
    auto py = [&](double y) {
        if (opt.clip) y = std::clamp(y, opt.y_min, opt.y_max);
        return kTop + (1.0 - (y - opt.y_min) / (opt.y_max - opt.y_min)) * ph;
    };

    std::string out = header(kW, kH);
    out += fmt::format("<text x=\"{:.1f}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n",
                       kLeft + pw / 2.0, escape(opt.title));
    out += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"none\" stroke=\"black\"/>\n",
                       kLeft, kTop, pw, ph);
    for (int i = 0; i <= 5; ++i) {
        const double yv = opt.y_min + (opt.y_max - opt.y_min) * i / 5.0;
        const double xv = x_min + (x_max - x_min) * i / 5.0;
        out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{}</text>\n", kLeft - 6.0,
                           py(yv) + 4.0, tick_label(yv));
        out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n", px(xv),
                           kTop + ph + 16.0, tick_label(xv));
    }
    out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n", kLeft + pw / 2.0,
                       kH - 12.0, escape(opt.x_label));
    out += fmt::format("<text x=\"16\" y=\"{:.1f}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1f})\">{}</text>\n",
                       kTop + ph / 2.0, kTop + ph / 2.0, escape(opt.y_label));

    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& s = series[i];
        const std::string c = color(i);
        std::string pts;
        for (std::size_t k = 0; k < s.x.size(); ++k) {
            pts += fmt::format("{}{:.2f},{:.2f}", k ? " " : "", px(s.x[k]), py(s.y[k]));
        }
        out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n", c, pts);
        for (std::size_t k = 0; k < s.err.size(); ++k) {
            out += fmt::format("<line x1=\"{0:.2f}\" x2=\"{0:.2f}\" y1=\"{1:.2f}\" y2=\"{2:.2f}\" stroke=\"{3}\"/>\n",
                               px(s.x[k]), py(s.y[k] - s.err[k]), py(s.y[k] + s.err[k]), c);
        }
        const double ly = kTop + 14.0 + 18.0 * static_cast<double>(i);
        out += fmt::format("<line x1=\"{0:.1f}\" x2=\"{1:.1f}\" y1=\"{2:.1f}\" y2=\"{2:.1f}\" stroke=\"{3}\" stroke-width=\"2\"/>\n",
                           kW - kRight + 10.0, kW - kRight + 30.0, ly, c);
        out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\">{}</text>\n", kW - kRight + 36.0, ly + 4.0,
                           escape(s.label));
    }
    out += "</svg>\n";
    return out;
}

std::string svg_trajectories(const Arena& arena, const std::vector<std::vector<Vec2>>& paths,
                             const std::vector<Circle>& circles, const std::string& title) {
    const double margin = 30.0;
    const double scale = 480.0 / std::max(arena.width, arena.height);
    const double w = arena.width * scale + 2.0 * margin;
    const double h = arena.height * scale + 2.0 * margin + 20.0;
    auto sx = [&](double x) { return margin + x * scale; };
    auto sy = [&](double y) { return margin + 20.0 + (arena.height - y) * scale; };

    std::string out = header(w, h);
    out += fmt::format("<text x=\"{:.1f}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n", w / 2.0,
                       escape(title));
    out += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/>\n",
                       sx(0.0), sy(arena.height), arena.width * scale, arena.height * scale);
    for (std::size_t i = 0; i < paths.size(); ++i) {
        std::string pts;
        for (std::size_t k = 0; k < paths[i].size(); ++k) {
            pts += fmt::format("{}{:.2f},{:.2f}", k ? " " : "", sx(paths[i][k].x), sy(paths[i][k].y));
        }
        out += fmt::format("<polyline class=\"path\" fill=\"none\" stroke=\"{}\" stroke-width=\"1\" stroke-opacity=\"0.7\" points=\"{}\"/>\n",
                           color(i), pts);
    }
    for (const auto& c : circles) {
        const bool source = c.css_class == "source";
        out += fmt::format("<circle class=\"{}\" cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"{:.2f}\" fill=\"{}\" stroke=\"{}\"/>\n",
                           escape(c.css_class), sx(c.center.x), sy(c.center.y), c.radius * scale,
                           source ? "#ff7f0e" : "none", source ? "#d62728" : "black");
    }
    out += "</svg>\n";
    return out;
}

std::string svg_coverage(const ExplorationSummary& s) {
    std::vector<Series> series;
    for (const auto& a : s.aggregates) {
        Series ser{a.strategy, {}, {}, {}};
        for (std::size_t k = 0; k < a.coverage_mean.size(); ++k) {
            ser.x.push_back(static_cast<double>(k) * s.config.checkpoint / 3600.0);
            ser.y.push_back(100.0 * a.coverage_mean[k]);
            ser.err.push_back(100.0 * a.coverage_sd[k]);
        }
        series.push_back(std::move(ser));
    }
    return svg_line_chart(series, {"Arena coverage", "time (h)", "coverage (%)", 0.0, 100.0, true});
}

std::string svg_search_times(const ExplorationSummary& s) {
    const double bar = 60.0;
    const double h = 360.0;
    const double w = 80.0 + bar * 1.5 * static_cast<double>(s.aggregates.size()) + 40.0;
    double top = 1.0;
    for (const auto& a : s.aggregates) top = std::max(top, (a.search_time_mean + a.search_time_sd) / 60.0);
    auto py = [&](double v) { return 40.0 + (1.0 - v / top) * (h - 90.0); };

    std::string out = header(w, h);
    out += fmt::format("<text x=\"{:.1f}\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">Search time to target</text>\n",
                       w / 2.0);
    out += fmt::format("<line x1=\"70\" x2=\"70\" y1=\"40\" y2=\"{:.1f}\" stroke=\"black\"/>\n", h - 50.0);
    out += fmt::format("<line x1=\"70\" x2=\"{:.1f}\" y1=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"black\"/>\n", w - 20.0, h - 50.0,
                       h - 50.0);
    for (int i = 0; i <= 4; ++i) {
        const double v = top * i / 4.0;
        out += fmt::format("<text x=\"64\" y=\"{:.1f}\" text-anchor=\"end\">{:.0f}</text>\n", py(v) + 4.0, v);
    }
    out += fmt::format("<text x=\"16\" y=\"{0:.1f}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {0:.1f})\">minutes</text>\n",
                       h / 2.0);
    for (std::size_t i = 0; i < s.aggregates.size(); ++i) {
        const auto& a = s.aggregates[i];
        const double x = 80.0 + bar * 1.5 * static_cast<double>(i);
        const double m = a.search_time_mean / 60.0;
        const double sd = a.search_time_sd / 60.0;
        out += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"{}\"/>\n", x, py(m), bar,
                           py(0.0) - py(m), color(i));
        out += fmt::format("<line x1=\"{0:.1f}\" x2=\"{0:.1f}\" y1=\"{1:.1f}\" y2=\"{2:.1f}\" stroke=\"black\"/>\n",
                           x + bar / 2.0, py(std::max(0.0, m - sd)), py(m + sd));
        out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n", x + bar / 2.0, h - 34.0,
                           escape(a.strategy));
        out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}/{}</text>\n", x + bar / 2.0,
                           h - 18.0, a.found, a.trials);
    }
    out += "</svg>\n";
    return out;
}

std::string svg_thermal_trajectories(const ThermalNavSummary& s) {
    std::vector<std::vector<Vec2>> paths;
    std::vector<Circle> circles;
    circles.push_back({s.config.source, s.config.success_radius, "goal"});
    circles.push_back({s.config.source, 0.15, "source"});
    for (const auto& t : s.trials) {
        paths.push_back(t.trajectory);
        for (const auto& p : t.arrival_points) circles.push_back({p, 0.2, "arrival"});
    }
    return svg_trajectories(s.config.arena, paths, circles,
                            fmt::format("Thermal navigation ({})", to_string(s.config.variant)));
}

std::string svg_arrival_distances(const ThermalNavSummary& s) {
    Series ser{"mean distance", {}, {}, {}};
    double top = 1.0;
    for (std::size_t k = 0; k < s.mean_arrival_distance.size(); ++k) {
        ser.x.push_back(static_cast<double>(k + 1));
        ser.y.push_back(s.mean_arrival_distance[k]);
        top = std::max(top, s.mean_arrival_distance[k]);
    }
    return svg_line_chart({ser}, {"Distance to source at each arrival", "arrival", "distance (m)", 0.0,
                                  std::ceil(top), true});
}

std::string svg_imu_errors(const ImuStudySummary& s) {
    std::vector<Series> series;
    double top = 1.0;
    for (const auto& t : s.trials) {
        Series ser{fmt::format("seed {}", t.seed), {}, {}, {}};
        for (const auto& e : t.errors) {
            ser.x.push_back(e.t);
            ser.y.push_back(e.error_pct);
            top = std::max(top, e.error_pct);
        }
        series.push_back(std::move(ser));
    }
    if (series.size() > 10) series.resize(10);
    return svg_line_chart(series, {"Dead-reckoning error", "time (s)", "error (% of distance)", 0.0,
                                   std::ceil(top), true});
}

std::string svg_mission_trajectories(const MissionStudySummary& s) {
    std::vector<std::vector<Vec2>> paths;
    std::vector<Circle> circles;
    for (const auto& src : s.scenario.world.sources) circles.push_back({src.center, src.radius, "source"});
    for (const auto& r : s.reports) {
        std::vector<Vec2> p;
        p.reserve(r.trajectory.size());
        for (const auto& q : r.trajectory) p.push_back(q.position());
        paths.push_back(std::move(p));
    }
    return svg_trajectories(s.scenario.world.arena, paths, circles, "Mission trajectories");
}

namespace {

std::filesystem::path put(const std::filesystem::path& dir, const char* name, const std::string& svg) {
    const auto p = dir / name;
    write_text(p, svg);
    return p;
}

}  // namespace

std::vector<std::filesystem::path> emit_plots(const ExplorationSummary& s, const std::filesystem::path& dir) {
    if (s.trials.empty()) throw std::invalid_argument("no trials to plot");
    return {put(dir, "coverage.svg", svg_coverage(s)), put(dir, "search_time.svg", svg_search_times(s))};
}

std::vector<std::filesystem::path> emit_plots(const ThermalNavSummary& s, const std::filesystem::path& dir) {
    if (s.trials.empty()) throw std::invalid_argument("no trials to plot");
    return {put(dir, "trajectories.svg", svg_thermal_trajectories(s)),
            put(dir, "arrival_distance.svg", svg_arrival_distances(s))};
}

std::vector<std::filesystem::path> emit_plots(const ImuStudySummary& s, const std::filesystem::path& dir) {
    if (s.trials.empty()) throw std::invalid_argument("no trials to plot");
    return {put(dir, "imu_error.svg", svg_imu_errors(s))};
}

std::vector<std::filesystem::path> emit_plots(const MissionStudySummary& s, const std::filesystem::path& dir) {
    if (s.reports.empty()) throw std::invalid_argument("no trials to plot");
    return {put(dir, "trajectories.svg", svg_mission_trajectories(s))};
}

}  // namespace cyborg
