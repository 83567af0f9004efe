#include "mapfix/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace mapfix {

namespace {

std::string fmt(double v) {
    char b[32];
    if (v != 0.0 && (std::abs(v) < 1e-3 || std::abs(v) >= 1e5))
        std::snprintf(b, sizeof(b), "%.1e", v);
    else
        std::snprintf(b, sizeof(b), "%.4g", v);
    return b;
}

}  // namespace

void write_svg_plot(const std::string& path, const PlotSpec& spec,
                    const std::vector<PlotSeries>& series) {
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const PlotSeries& s : series) {
        for (double v : s.x) {
            xmin = std::min(xmin, v);
            xmax = std::max(xmax, v);
        }
        for (double v : s.y) {
            if (spec.log_y && v <= 0.0) continue;
            const double t = spec.log_y ? std::log10(v) : v;
            ymin = std::min(ymin, t);
            ymax = std::max(ymax, t);
        }
    }
    if (xmin > xmax) {
        xmin = 0.0;
        xmax = 1.0;
    }
    if (ymin > ymax) {
        ymin = 0.0;
        ymax = 1.0;
    }
    if (xmax - xmin < 1e-12) xmax = xmin + 1.0;
    if (ymax - ymin < 1e-12) ymax = ymin + 1.0;

    const double ml = 62, mr = 16, mt = 34, mb = 46;
    const double pw = spec.width - ml - mr, ph = spec.height - mt - mb;
    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) {
        const double t = spec.log_y ? std::log10(y) : y;
        return mt + (1.0 - (t - ymin) / (ymax - ymin)) * ph;
    };

    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << "<svg xmlns='http://www.w3.org/2000/svg' width='" << spec.width
      << "' height='" << spec.height << "' font-family='sans-serif' font-size='11'>\n";
    f << "<rect width='100%' height='100%' fill='white'/>\n";
    f << "<text x='" << spec.width / 2 << "' y='18' text-anchor='middle' font-size='13'>"
      << spec.title << "</text>\n";

    // Frame and ticks.
    f << "<rect x='" << ml << "' y='" << mt << "' width='" << pw << "' height='" << ph
      << "' fill='none' stroke='black'/>\n";
    const int nticks = 5;
    for (int i = 0; i <= nticks; ++i) {
        const double fx = xmin + (xmax - xmin) * i / nticks;
        f << "<line x1='" << px(fx) << "' y1='" << mt + ph << "' x2='" << px(fx)
          << "' y2='" << mt + ph + 4 << "' stroke='black'/>\n";
        f << "<text x='" << px(fx) << "' y='" << mt + ph + 16
          << "' text-anchor='middle'>" << fmt(fx) << "</text>\n";
        const double ty = ymin + (ymax - ymin) * i / nticks;
        const double fy = spec.log_y ? std::pow(10.0, ty) : ty;
        f << "<line x1='" << ml - 4 << "' y1='" << py(fy) << "' x2='" << ml
          << "' y2='" << py(fy) << "' stroke='black'/>\n";
        f << "<text x='" << ml - 7 << "' y='" << py(fy) + 4
          << "' text-anchor='end'>" << fmt(fy) << "</text>\n";
        if (i > 0 && i < nticks) {
            f << "<line x1='" << ml << "' y1='" << py(fy) << "' x2='" << ml + pw
              << "' y2='" << py(fy) << "' stroke='#dddddd'/>\n";
        }
    }
    f << "<text x='" << ml + pw / 2 << "' y='" << spec.height - 10
      << "' text-anchor='middle'>" << spec.x_label << "</text>\n";
    f << "<text x='16' y='" << mt + ph / 2
      << "' text-anchor='middle' transform='rotate(-90 16 " << mt + ph / 2 << ")'>"
      << spec.y_label << "</text>\n";

    int li = 0;
    for (const PlotSeries& s : series) {
        f << "<polyline fill='none' stroke='" << s.color << "' stroke-width='1.5' points='";
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            double yv = s.y[i];
            if (spec.log_y && yv <= 0.0) continue;
            f << px(s.x[i]) << "," << py(yv) << " ";
        }
        f << "'/>\n";
        const double lx = ml + 10, ly = mt + 14 + 16 * li++;
        f << "<line x1='" << lx << "' y1='" << ly - 4 << "' x2='" << lx + 22
          << "' y2='" << ly - 4 << "' stroke='" << s.color << "' stroke-width='2'/>\n";
        f << "<text x='" << lx + 27 << "' y='" << ly << "'>" << s.label << "</text>\n";
    }
    f << "</svg>\n";
}

}  // namespace mapfix
