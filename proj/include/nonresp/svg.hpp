#pragma once

#include <string>
#include <vector>

namespace nonresp::svg {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

/// Minimal standalone line chart, enough for ROC and validation curves.
std::string line_chart(const std::string& title, const std::string& x_label,
                       const std::string& y_label, const std::vector<Series>& series);

} // namespace nonresp::svg
