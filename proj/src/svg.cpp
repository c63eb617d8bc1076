#include "nonresp/svg.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

namespace nonresp::svg {

namespace {

constexpr double kWidth = 640.0, kHeight = 480.0;
constexpr double kLeft = 70.0, kRight = 600.0, kTop = 50.0, kBottom = 420.0;
const char* kColors[] = {"#1f6fb2", "#d1495b", "#3a7d44", "#8d6a9f", "#c77d1e"};

std::string num(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 2);
    return std::string(buf, res.ptr);
}

} // namespace

std::string line_chart(const std::string& title, const std::string& x_label,
                       const std::string& y_label, const std::vector<Series>& series) {
    double x_lo = 0.0, x_hi = 1.0, y_lo = 0.0, y_hi = 1.0;
    bool first = true;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            if (first) {
                x_lo = x_hi = s.x[i];
                y_lo = y_hi = s.y[i];
                first = false;
            }
            x_lo = std::min(x_lo, s.x[i]);
            x_hi = std::max(x_hi, s.x[i]);
            y_lo = std::min(y_lo, s.y[i]);
            y_hi = std::max(y_hi, s.y[i]);
        }
    if (x_hi == x_lo) x_hi = x_lo + 1.0;
    if (y_hi == y_lo) y_hi = y_lo + 1.0;

    auto px = [&](double x) { return kLeft + (x - x_lo) / (x_hi - x_lo) * (kRight - kLeft); };
    auto py = [&](double y) { return kBottom - (y - y_lo) / (y_hi - y_lo) * (kBottom - kTop); };

    std::string out =
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"480\" "
        "viewBox=\"0 0 640 480\">\n"
        "<rect width=\"640\" height=\"480\" fill=\"white\"/>\n";
    out += "<text x=\"320\" y=\"28\" text-anchor=\"middle\" font-size=\"16\">" + title +
           "</text>\n";
    out += "<rect x=\"" + num(kLeft) + "\" y=\"" + num(kTop) + "\" width=\"" +
           num(kRight - kLeft) + "\" height=\"" + num(kBottom - kTop) +
           "\" fill=\"none\" stroke=\"#444\"/>\n";

    for (int tick = 0; tick <= 4; ++tick) {
        const double fx = x_lo + (x_hi - x_lo) * tick / 4.0;
        const double fy = y_lo + (y_hi - y_lo) * tick / 4.0;
        out += "<text x=\"" + num(px(fx)) + "\" y=\"" + num(kBottom + 18.0) +
               "\" text-anchor=\"middle\" font-size=\"11\">" + num(fx) + "</text>\n";
        out += "<text x=\"" + num(kLeft - 8.0) + "\" y=\"" + num(py(fy) + 4.0) +
               "\" text-anchor=\"end\" font-size=\"11\">" + num(fy) + "</text>\n";
    }
    out += "<text x=\"320\" y=\"460\" text-anchor=\"middle\" font-size=\"13\">" + x_label +
           "</text>\n";
    out += "<text x=\"18\" y=\"240\" text-anchor=\"middle\" font-size=\"13\" "
           "transform=\"rotate(-90 18 240)\">" +
           y_label + "</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = kColors[s % 5];
        std::string points;
        for (std::size_t i = 0; i < series[s].x.size(); ++i) {
            if (!std::isfinite(series[s].x[i]) || !std::isfinite(series[s].y[i])) continue;
            points += num(px(series[s].x[i])) + "," + num(py(series[s].y[i])) + " ";
        }
        out += "<polyline points=\"" + points + "\" fill=\"none\" stroke=\"" + color +
               "\" stroke-width=\"1.5\"/>\n";
        out += "<text x=\"" + num(kRight - 4.0) + "\" y=\"" +
               num(kTop + 16.0 + 16.0 * static_cast<double>(s)) +
               "\" text-anchor=\"end\" font-size=\"12\" fill=\"" + color + "\">" +
               series[s].label + "</text>\n";
    }
    out += "</svg>\n";
    return out;
}

} // namespace nonresp::svg
