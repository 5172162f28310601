#include "p3rnn/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace p3rnn::svg {

namespace {

// Symmetric diverging endpoints: mirroring a value across 0 swaps the red
// and blue channels, which keeps negation tests exact.
constexpr int kNeg[3] = {59, 76, 192};
constexpr int kPos[3] = {192, 76, 59};

std::string lerp_from_white(const int target[3], double t) {
    char buf[8];
    const int r = static_cast<int>(std::lround(255.0 + (target[0] - 255.0) * t));
    const int g = static_cast<int>(std::lround(255.0 + (target[1] - 255.0) * t));
    const int b = static_cast<int>(std::lround(255.0 + (target[2] - 255.0) * t));
    std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
    return buf;
}

std::string color_for(double v, double scale, bool signed_palette) {
    if (scale <= 0) return lerp_from_white(kPos, 0.0);
    const double t = std::clamp(v / scale, -1.0, 1.0);
    if (!signed_palette) return lerp_from_white(kPos, std::max(0.0, t));
    return t >= 0 ? lerp_from_white(kPos, t) : lerp_from_white(kNeg, -t);
}

void check_finite(const std::vector<double>& vals) {
    for (double v : vals)
        if (!std::isfinite(v)) throw InputError("svg: non-finite value");
}

std::string num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string rect(double x, double y, double w, double h, const std::string& fill) {
    return "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) +
           "\" height=\"" + num(h) + "\" fill=\"" + fill + "\"/>\n";
}

std::string text(double x, double y, const std::string& s, int size,
                 const std::string& anchor) {
    return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-family=\"monospace\"" +
           " font-size=\"" + std::to_string(size) + "\" text-anchor=\"" + anchor + "\">" + s +
           "</text>\n";
}

} // namespace

std::string heatmap(const Mat& values, const std::vector<std::string>& row_labels,
                    const std::vector<std::string>& col_labels, bool signed_palette,
                    const std::string& title) {
    if (row_labels.size() != values.rows || col_labels.size() != values.cols)
        throw InputError("svg::heatmap: label counts do not match the matrix");
    check_finite(values.a);

    double scale = 0;
    for (double v : values.a) scale = std::max(scale, std::fabs(v));

    const double cell = 14, left = 64, top = 34, legend_w = 72, bottom = 30;
    const double grid_w = cell * values.cols, grid_h = cell * values.rows;
    const double width = left + grid_w + legend_w + 16, height = top + grid_h + bottom;

    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) +
                      "\" height=\"" + num(height) + "\">\n";
    out += rect(0, 0, width, height, "#ffffff");
    out += text(left, 18, title, 13, "start");

    for (size_t r = 0; r < values.rows; ++r) {
        for (size_t c = 0; c < values.cols; ++c)
            out += rect(left + c * cell, top + r * cell, cell, cell,
                        color_for(values.at(r, c), scale, signed_palette));
        out += text(left - 6, top + r * cell + cell - 3, row_labels[r], 9, "end");
    }
    const size_t col_step = values.cols > 16 ? 4 : 1;
    for (size_t c = 0; c < values.cols; c += col_step)
        out += text(left + c * cell + cell / 2, top + grid_h + 14, col_labels[c], 9, "middle");

    // legend: vertical gradient strip from +scale (top) to the palette bottom
    const double lx = left + grid_w + 28, lh = grid_h, steps = 48;
    for (int i = 0; i < steps; ++i) {
        const double frac = 1.0 - (i + 0.5) / steps;                  // 1 at top
        const double v = signed_palette ? (2 * frac - 1) * scale : frac * scale;
        out += rect(lx, top + i * (lh / steps), 14, lh / steps + 0.5,
                    color_for(v, scale, signed_palette));
    }
    out += text(lx + 18, top + 8, num(scale), 9, "start");
    if (signed_palette) {
        out += text(lx + 18, top + lh / 2 + 3, "0", 9, "start");
        out += text(lx + 18, top + lh, num(-scale), 9, "start");
    } else {
        out += text(lx + 18, top + lh, "0", 9, "start");
    }
    out += "</svg>\n";
    return out;
}

std::string bar_chart(const std::vector<std::string>& labels, const std::vector<double>& values,
                      const std::string& title) {
    if (labels.size() != values.size())
        throw InputError("svg::bar_chart: label count does not match values");
    check_finite(values);

    double vmax = 0, vmin = 0;
    for (double v : values) {
        vmax = std::max(vmax, v);
        vmin = std::min(vmin, v);
    }
    if (vmax == 0 && vmin == 0) vmax = 1;

    const double bar = 16, gap = 4, left = 48, top = 34, plot_h = 160, bottom = 34;
    const double width = left + values.size() * (bar + gap) + 24;
    const double height = top + plot_h + bottom;
    const double span = vmax - vmin;
    const double zero_y = top + plot_h * (vmax / span);

    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) +
                      "\" height=\"" + num(height) + "\">\n";
    out += rect(0, 0, width, height, "#ffffff");
    out += text(left, 18, title, 13, "start");

    for (size_t i = 0; i < values.size(); ++i) {
        const double x = left + i * (bar + gap);
        const double h = plot_h * std::fabs(values[i]) / span;
        const double y = values[i] >= 0 ? zero_y - h : zero_y;
        out += rect(x, y, bar, h, values[i] >= 0 ? "#c04c3b" : "#3b4cc0");
    }
    out += rect(left - 2, zero_y, values.size() * (bar + gap) + 4, 1, "#222222");

    const size_t step = values.size() > 16 ? 4 : 1;
    for (size_t i = 0; i < labels.size(); i += step)
        out += text(left + i * (bar + gap) + bar / 2, top + plot_h + 16, labels[i], 9, "middle");
    out += text(left - 6, top + 8, num(vmax), 9, "end");
    if (vmin < 0) out += text(left - 6, top + plot_h, num(vmin), 9, "end");
    out += "</svg>\n";
    return out;
}

} // namespace p3rnn::svg
