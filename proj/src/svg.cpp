#include "fpinv/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace fpinv::svg {

namespace {

constexpr double kMarginLeft = 60.0;
constexpr double kMarginRight = 20.0;
constexpr double kMarginTop = 36.0;
constexpr double kMarginBottom = 46.0;

std::string escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string fmt(double v) {
    std::ostringstream ss;
    ss.precision(6);
    ss << v;
    return ss.str();
}

void render_into(std::ostringstream& out, const Plot& plot, double ox, double oy) {
    double x_min = std::numeric_limits<double>::infinity(), x_max = -x_min;
    double y_min = x_min, y_max = -x_min;
    for (const auto& s : plot.series) {
        for (double v : s.x) {
            x_min = std::min(x_min, v);
            x_max = std::max(x_max, v);
        }
        for (double v : s.y) {
            const double t = plot.log_y ? std::log10(std::max(v, 1e-300)) : v;
            y_min = std::min(y_min, t);
            y_max = std::max(y_max, t);
        }
    }
    if (!(x_min < x_max)) { x_min -= 0.5; x_max += 0.5; }
    if (!(y_min < y_max)) { y_min -= 0.5; y_max += 0.5; }

    const double plot_w = plot.width - kMarginLeft - kMarginRight;
    const double plot_h = plot.height - kMarginTop - kMarginBottom;
    auto map_x = [&](double v) { return ox + kMarginLeft + (v - x_min) / (x_max - x_min) * plot_w; };
    auto map_y = [&](double v) {
        const double t = plot.log_y ? std::log10(std::max(v, 1e-300)) : v;
        return oy + kMarginTop + (1.0 - (t - y_min) / (y_max - y_min)) * plot_h;
    };

    out << "<rect x=\"" << fmt(ox + kMarginLeft) << "\" y=\"" << fmt(oy + kMarginTop)
        << "\" width=\"" << fmt(plot_w) << "\" height=\"" << fmt(plot_h)
        << "\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>\n";

    // axis ticks
    for (int i = 0; i <= 4; ++i) {
        const double tx = x_min + (x_max - x_min) * i / 4.0;
        const double ty_val = y_min + (y_max - y_min) * i / 4.0;
        const double px = map_x(tx);
        const double py = oy + kMarginTop + (1.0 - i / 4.0) * plot_h;
        out << "<text x=\"" << fmt(px) << "\" y=\"" << fmt(oy + plot.height - kMarginBottom + 16)
            << "\" font-size=\"10\" text-anchor=\"middle\" fill=\"#333\">" << fmt(tx)
            << "</text>\n";
        out << "<text x=\"" << fmt(ox + kMarginLeft - 6) << "\" y=\"" << fmt(py + 3)
            << "\" font-size=\"10\" text-anchor=\"end\" fill=\"#333\">"
            << fmt(plot.log_y ? std::pow(10.0, ty_val) : ty_val) << "</text>\n";
    }

    for (const auto& s : plot.series) {
        if (s.x.size() != s.y.size() || s.x.empty()) {
            throw std::invalid_argument("svg: series with mismatched or empty data");
        }
        out << "<polyline fill=\"none\" stroke=\"" << s.color
            << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            out << fmt(map_x(s.x[i])) << ',' << fmt(map_y(s.y[i])) << ' ';
        }
        out << "\"/>\n";
    }

    out << "<text x=\"" << fmt(ox + plot.width / 2) << "\" y=\"" << fmt(oy + 16)
        << "\" font-size=\"13\" text-anchor=\"middle\" fill=\"#000\">" << escape(plot.title)
        << "</text>\n";
    out << "<text x=\"" << fmt(ox + plot.width / 2) << "\" y=\"" << fmt(oy + plot.height - 8)
        << "\" font-size=\"11\" text-anchor=\"middle\" fill=\"#333\">" << escape(plot.x_label)
        << "</text>\n";
    out << "<text x=\"" << fmt(ox + 14) << "\" y=\"" << fmt(oy + plot.height / 2)
        << "\" font-size=\"11\" text-anchor=\"middle\" fill=\"#333\" transform=\"rotate(-90 "
        << fmt(ox + 14) << ' ' << fmt(oy + plot.height / 2) << ")\">" << escape(plot.y_label)
        << "</text>\n";

    // legend
    double ly = oy + kMarginTop + 14.0;
    for (const auto& s : plot.series) {
        if (s.label.empty()) continue;
        const double lx = ox + kMarginLeft + 10.0;
        out << "<line x1=\"" << fmt(lx) << "\" y1=\"" << fmt(ly - 4) << "\" x2=\"" << fmt(lx + 18)
            << "\" y2=\"" << fmt(ly - 4) << "\" stroke=\"" << s.color
            << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << fmt(lx + 24) << "\" y=\"" << fmt(ly) << "\" font-size=\"10\" "
            << "fill=\"#333\">" << escape(s.label) << "</text>\n";
        ly += 14.0;
    }
}

}  // namespace

std::string render(const Plot& plot) {
    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(plot.width)
        << "\" height=\"" << fmt(plot.height) << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n";
    render_into(out, plot, 0.0, 0.0);
    out << "</svg>\n";
    return out.str();
}

void write(const Plot& plot, const std::filesystem::path& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("svg: cannot open " + path.string());
    os << render(plot);
}

void write_grid(const std::vector<Plot>& plots, std::size_t columns,
                const std::filesystem::path& path) {
    if (plots.empty() || columns == 0) throw std::invalid_argument("svg: empty grid");
    const std::size_t rows = (plots.size() + columns - 1) / columns;
    const double cell_w = plots.front().width;
    const double cell_h = plots.front().height;

    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\""
        << fmt(cell_w * static_cast<double>(columns)) << "\" height=\""
        << fmt(cell_h * static_cast<double>(rows)) << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"#fff\"/>\n";
    for (std::size_t i = 0; i < plots.size(); ++i) {
        render_into(out, plots[i], static_cast<double>(i % columns) * cell_w,
                    static_cast<double>(i / columns) * cell_h);
    }
    out << "</svg>\n";

    std::ofstream os(path);
    if (!os) throw std::runtime_error("svg: cannot open " + path.string());
    os << out.str();
}

Plot histogram_plot(const std::vector<std::size_t>& counts, double bin_width,
                    const std::string& title) {
    Plot plot;
    plot.title = title;
    plot.x_label = "delta MAE";
    plot.y_label = "count";
    Series bars;
    bars.color = "#ff7f0e";
    // step outline across bins
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const double lo = static_cast<double>(i) * bin_width;
        const double hi = static_cast<double>(i + 1) * bin_width;
        const double c = static_cast<double>(counts[i]);
        bars.x.insert(bars.x.end(), {lo, lo, hi, hi});
        bars.y.insert(bars.y.end(), {0.0, c, c, 0.0});
    }
    if (bars.x.empty()) {
        bars.x = {0.0, bin_width};
        bars.y = {0.0, 0.0};
    }
    plot.series.push_back(std::move(bars));
    return plot;
}

}  // namespace fpinv::svg
