#pragma once

#include <span>
#include <vector>

namespace hypbc {

struct OrderFit {
  double order;     // minus the slope of log(error) against log(resolution)
  double residual;  // root-mean-square misfit in log space
};

/// Least-squares fit of log(error) = c - order * log(resolution) over the last
/// `finest` points. Non-positive errors are rejected.
OrderFit fit_order(std::span<const double> resolution, std::span<const double> error, int finest = 4);

/// Mean absolute difference of two equally sized samples.
double l1_error(std::span<const double> simulated, std::span<const double> exact);

}  // namespace hypbc
