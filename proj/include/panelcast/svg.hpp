#pragma once

#include <string>
#include <vector>

namespace panelcast {

struct ChartSeries {
    std::string label;
    std::string color;
    std::vector<int> years;
    std::vector<double> values;
    bool dashed = false;
};

// Line chart of yearly series as a standalone SVG document. One polyline per
// series; axis ranges cover all series.
std::string render_line_chart(const std::string& title, const std::vector<ChartSeries>& series);

} // namespace panelcast
