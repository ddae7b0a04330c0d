#pragma once

#include "bayinv/types.hpp"

#include <vector>

namespace bayinv {

/// n points from lo to hi inclusive (n >= 2), or the midpoint when n == 1.
std::vector<double> linspace(double lo, double hi, std::size_t n);

/// Tensor grid with n points per dimension. The first coordinate varies
/// slowest. With cell_centred the points sit at the centres of n equal cells,
/// otherwise on an inclusive linspace.
std::vector<Vector> tensor_grid(const Box& box, std::size_t n, bool cell_centred);

} // namespace bayinv
