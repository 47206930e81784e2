#pragma once

#include <string>
#include <vector>

namespace bif {

// Minimal deterministic SVG chart writer; no plotting dependency.

struct BarChartSpec {
    std::string title;
    std::vector<std::string> labels;
    std::vector<double> values;
    std::vector<double> whiskers;  // optional +- extents, may be empty
    int width = 640;
    int height = 360;
};

std::string svg_bar_chart(const BarChartSpec& spec);

struct LineSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

struct LineChartSpec {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<LineSeries> series;
    int width = 640;
    int height = 360;
};

std::string svg_line_chart(const LineChartSpec& spec);

}  // namespace bif
