#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pmcgd/classification.hpp"
#include "pmcgd/data.hpp"

namespace pmcgd {

// Scatter plot of bivariate data: one colour per cluster, hollow circles
// for good points, filled discs for bad points, and a legend. Every
// observation yields exactly one <circle class="marker ..."> element.
std::string render_svg_scatter(const DataMatrix& X, const std::vector<ObservationLabel>& labels);

void emit_svg_scatter(const DataMatrix& X, const std::vector<ObservationLabel>& labels,
                      const std::filesystem::path& path);

}  // namespace pmcgd
