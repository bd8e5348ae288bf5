#include "panelcast/svg.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace panelcast {

namespace {

constexpr double kWidth = 720;
constexpr double kHeight = 400;
constexpr double kLeft = 60;
constexpr double kRight = 150;
constexpr double kTop = 40;
constexpr double kBottom = 40;

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out.push_back(c);
        }
    }
    return out;
}

} // namespace

std::string render_line_chart(const std::string& title, const std::vector<ChartSeries>& series) {
    int y0 = std::numeric_limits<int>::max();
    int y1 = std::numeric_limits<int>::min();
    double v0 = std::numeric_limits<double>::infinity();
    double v1 = -std::numeric_limits<double>::infinity();
    for (const auto& s : series) {
        for (int y : s.years) {
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
        for (double v : s.values) {
            if (!std::isfinite(v)) continue;
            v0 = std::min(v0, v);
            v1 = std::max(v1, v);
        }
    }
    if (y0 > y1) {
        y0 = 0;
        y1 = 1;
    }
    if (y0 == y1) ++y1;
    if (!(v0 <= v1)) {
        v0 = 0;
        v1 = 1;
    }
    const double pad = v1 > v0 ? 0.05 * (v1 - v0) : 0.5;
    v0 -= pad;
    v1 += pad;

    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    auto px = [&](double year) { return kLeft + (year - y0) / static_cast<double>(y1 - y0) * plot_w; };
    auto py = [&](double v) { return kTop + (v1 - v) / (v1 - v0) * plot_h; };

    std::string svg = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
        "font-family=\"sans-serif\" font-size=\"11\">\n",
        kWidth, kHeight);
    svg += fmt::format("<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n", kWidth, kHeight);
    svg += fmt::format("<text x=\"{}\" y=\"22\" font-size=\"14\" text-anchor=\"middle\">{}</text>\n",
                       kLeft + plot_w / 2, xml_escape(title));
    svg += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#444\"/>\n", kLeft,
                       kTop, plot_w, plot_h);

    const int year_step = std::max(1, (y1 - y0 + 9) / 10);
    for (int y = y0; y <= y1; y += year_step) {
        svg += fmt::format("<line x1=\"{0:.2f}\" y1=\"{1}\" x2=\"{0:.2f}\" y2=\"{2}\" stroke=\"#ddd\"/>\n", px(y), kTop,
                           kTop + plot_h);
        svg += fmt::format("<text x=\"{:.2f}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", px(y), kTop + plot_h + 16, y);
    }
    for (int i = 0; i <= 5; ++i) {
        const double v = v0 + (v1 - v0) * i / 5.0;
        svg += fmt::format("<line x1=\"{0}\" y1=\"{1:.2f}\" x2=\"{2}\" y2=\"{1:.2f}\" stroke=\"#ddd\"/>\n", kLeft, py(v),
                           kLeft + plot_w);
        svg += fmt::format("<text x=\"{}\" y=\"{:.2f}\" text-anchor=\"end\">{:.3f}</text>\n", kLeft - 6, py(v) + 4, v);
    }

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        std::string points;
        for (std::size_t i = 0; i < s.years.size() && i < s.values.size(); ++i) {
            if (!std::isfinite(s.values[i])) continue;
            if (!points.empty()) points.push_back(' ');
            points += fmt::format("{:.2f},{:.2f}", px(s.years[i]), py(s.values[i]));
        }
        svg += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"2\"{} points=\"{}\"/>\n", s.color,
                           s.dashed ? " stroke-dasharray=\"6,4\"" : "", points);
        const double ly = kTop + 12 + 18.0 * static_cast<double>(k);
        svg += fmt::format("<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"{3}\" stroke-width=\"2\"{4}/>\n",
                           kLeft + plot_w + 10, ly, kLeft + plot_w + 34, s.color,
                           s.dashed ? " stroke-dasharray=\"6,4\"" : "");
        svg += fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", kLeft + plot_w + 40, ly + 4, xml_escape(s.label));
    }
    svg += "</svg>\n";
    return svg;
}

} // namespace panelcast
