#pragma once

#include <filesystem>
#include <string>
#include <vector>

// Minimal self-contained SVG line/bar plots for diagnostic figures. No
// external assets; output is plain polylines with axes and labels.

namespace fpinv::svg {

struct Series {
    std::vector<double> x;
    std::vector<double> y;
    std::string color = "#1f77b4";
    std::string label;
};

struct Plot {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
    bool log_y = false;
    double width = 640.0;
    double height = 420.0;
};

std::string render(const Plot& plot);
void write(const Plot& plot, const std::filesystem::path& path);

/// Grid of plots stacked into a single SVG document (panels left-to-right,
/// top-to-bottom).
void write_grid(const std::vector<Plot>& plots, std::size_t columns,
                const std::filesystem::path& path);

/// Bar chart of histogram counts.
Plot histogram_plot(const std::vector<std::size_t>& counts, double bin_width,
                    const std::string& title);

}  // namespace fpinv::svg
