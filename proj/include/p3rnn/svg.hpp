#pragma once

#include <string>
#include <vector>

#include "p3rnn/common.hpp"

namespace p3rnn::svg {

// Heatmap with row/column labels and a color legend. Signed inputs use a
// diverging palette whose midpoint sits at exactly 0; unsigned inputs use a
// sequential palette from white. Output is byte-deterministic.
std::string heatmap(const Mat& values, const std::vector<std::string>& row_labels,
                    const std::vector<std::string>& col_labels, bool signed_palette,
                    const std::string& title);

// Vertical bar chart over labeled positions (non-negative or signed values).
std::string bar_chart(const std::vector<std::string>& labels,
                      const std::vector<double>& values, const std::string& title);

} // namespace p3rnn::svg
