#pragma once
// Dependency-free SVG line charts for the training curves and error CDFs.

#include <string>
#include <vector>

namespace mapfix {

struct PlotSeries {
    std::string label;
    std::string color;  // CSS color
    std::vector<double> x;
    std::vector<double> y;
};

struct PlotSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_y = false;
    int width = 640;
    int height = 420;
};

// Multi-series line chart with axes, ticks and a legend.
void write_svg_plot(const std::string& path, const PlotSpec& spec,
                    const std::vector<PlotSeries>& series);

}  // namespace mapfix
