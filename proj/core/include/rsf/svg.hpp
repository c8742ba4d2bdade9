#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>

#include "rsf/grid.hpp"

namespace rsf::svg {

// Truth on the x axis, prediction on the y axis, with the diagonal for reference.
std::string scatter(std::span<const double> truth, std::span<const double> pred, const std::string& title);

// Time on the vertical axis (t0 at the top), space horizontal. Large grids are block-averaged
// to at most max_cells cells per axis. Without an explicit range the colour scale spans the data.
std::string heatmap(const GridFunction& f, const std::string& title,
                    std::optional<std::pair<double, double>> range = std::nullopt, int max_cells = 160);

}  // namespace rsf::svg
