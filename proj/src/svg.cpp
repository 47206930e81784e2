#include "bif/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace bif {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

std::string header(int w, int h, const std::string& title) {
    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
      << "\" height=\"" << h << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n"
      << "<rect width=\"" << w << "\" height=\"" << h << "\" fill=\"white\"/>\n"
      << "<text x=\"" << w / 2
      << "\" y=\"18\" text-anchor=\"middle\" font-size=\"14\" "
         "font-family=\"sans-serif\">"
      << title << "</text>\n";
    return s.str();
}

const char* kColors[] = {"#4878d0", "#ee854a", "#6acc64", "#d65f5f", "#956cb4"};

}  // namespace

std::string svg_bar_chart(const BarChartSpec& spec) {
    const int w = spec.width, h = spec.height;
    const double left = 50, right = 15, top = 30, bottom = 45;
    const double pw = w - left - right, ph = h - top - bottom;
    double vmax = 1e-12;
    for (std::size_t i = 0; i < spec.values.size(); ++i) {
        double v = spec.values[i];
        if (!spec.whiskers.empty()) v += spec.whiskers[i];
        vmax = std::max(vmax, v);
    }
    std::ostringstream s;
    s << header(w, h, spec.title);
    const std::size_t n = spec.values.size();
    const double slot = pw / static_cast<double>(n);
    const double bw = slot * 0.7;
    // y axis with 4 gridlines
    for (int t = 0; t <= 4; ++t) {
        const double v = vmax * t / 4.0;
        const double y = top + ph * (1.0 - t / 4.0);
        s << "<line x1=\"" << num(left) << "\" y1=\"" << num(y) << "\" x2=\""
          << num(left + pw) << "\" y2=\"" << num(y)
          << "\" stroke=\"#dddddd\"/>\n"
          << "<text x=\"" << num(left - 5) << "\" y=\"" << num(y + 4)
          << "\" text-anchor=\"end\" font-size=\"10\" "
             "font-family=\"sans-serif\">"
          << num(v) << "</text>\n";
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double x = left + slot * i + (slot - bw) / 2.0;
        const double bh = ph * spec.values[i] / vmax;
        s << "<rect x=\"" << num(x) << "\" y=\"" << num(top + ph - bh)
          << "\" width=\"" << num(bw) << "\" height=\"" << num(bh)
          << "\" fill=\"" << kColors[0] << "\"/>\n";
        if (!spec.whiskers.empty() && spec.whiskers[i] > 0.0) {
            const double cx = x + bw / 2.0;
            const double lo = top + ph - ph * std::max(0.0, spec.values[i] - spec.whiskers[i]) / vmax;
            const double hi = top + ph - ph * std::min(vmax, spec.values[i] + spec.whiskers[i]) / vmax;
            s << "<line x1=\"" << num(cx) << "\" y1=\"" << num(lo) << "\" x2=\""
              << num(cx) << "\" y2=\"" << num(hi)
              << "\" stroke=\"#333333\" stroke-width=\"1.5\"/>\n";
        }
        if (!spec.labels.empty()) {
            s << "<text x=\"" << num(x + bw / 2.0) << "\" y=\""
              << num(top + ph + 14)
              << "\" text-anchor=\"middle\" font-size=\"10\" "
                 "font-family=\"sans-serif\">"
              << spec.labels[i] << "</text>\n";
        }
    }
    s << "</svg>\n";
    return s.str();
}

std::string svg_line_chart(const LineChartSpec& spec) {
    const int w = spec.width, h = spec.height;
    const double left = 55, right = 15, top = 30, bottom = 45;
    const double pw = w - left - right, ph = h - top - bottom;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& sr : spec.series) {
        for (double v : sr.x) {
            xmin = std::min(xmin, v);
            xmax = std::max(xmax, v);
        }
        for (double v : sr.y) {
            ymin = std::min(ymin, v);
            ymax = std::max(ymax, v);
        }
    }
    if (xmax <= xmin) xmax = xmin + 1.0;
    if (ymax <= ymin) ymax = ymin + 1.0;
    auto px = [&](double v) { return left + pw * (v - xmin) / (xmax - xmin); };
    auto py = [&](double v) { return top + ph * (1.0 - (v - ymin) / (ymax - ymin)); };
    std::ostringstream s;
    s << header(w, h, spec.title);
    for (int t = 0; t <= 4; ++t) {
        const double v = ymin + (ymax - ymin) * t / 4.0;
        const double y = py(v);
        s << "<line x1=\"" << num(left) << "\" y1=\"" << num(y) << "\" x2=\""
          << num(left + pw) << "\" y2=\"" << num(y)
          << "\" stroke=\"#dddddd\"/>\n"
          << "<text x=\"" << num(left - 5) << "\" y=\"" << num(y + 4)
          << "\" text-anchor=\"end\" font-size=\"10\" "
             "font-family=\"sans-serif\">"
          << num(v) << "</text>\n";
    }
    std::size_t ci = 0;
    for (const auto& sr : spec.series) {
        std::ostringstream pts;
        for (std::size_t i = 0; i < sr.x.size(); ++i)
            pts << num(px(sr.x[i])) << ',' << num(py(sr.y[i])) << ' ';
        const char* color = kColors[ci % 5];
        s << "<polyline fill=\"none\" stroke=\"" << color
          << "\" stroke-width=\"2\" points=\"" << pts.str() << "\"/>\n";
        for (std::size_t i = 0; i < sr.x.size(); ++i)
            s << "<circle cx=\"" << num(px(sr.x[i])) << "\" cy=\""
              << num(py(sr.y[i])) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
        s << "<text x=\"" << num(left + pw - 5) << "\" y=\""
          << num(top + 14 + 14.0 * ci)
          << "\" text-anchor=\"end\" font-size=\"11\" fill=\"" << color
          << "\" font-family=\"sans-serif\">" << sr.name << "</text>\n";
        ++ci;
    }
    s << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(h - 8)
      << "\" text-anchor=\"middle\" font-size=\"11\" "
         "font-family=\"sans-serif\">"
      << spec.x_label << "</text>\n";
    s << "</svg>\n";
    return s.str();
}

}  // namespace bif
