#include "hypbc/convergence.hpp"

#include <cmath>
#include <stdexcept>

namespace hypbc {

OrderFit fit_order(std::span<const double> resolution, std::span<const double> error, int finest) {
  if (resolution.size() != error.size()) throw std::invalid_argument("fit_order: size mismatch");
  const std::size_t n = std::min<std::size_t>(resolution.size(), static_cast<std::size_t>(finest));
  if (n < 2) throw std::invalid_argument("fit_order: need at least two points");
  const std::size_t first = resolution.size() - n;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = first; i < resolution.size(); ++i) {
    if (!(error[i] > 0.0) || !(resolution[i] > 0.0)) throw std::invalid_argument("fit_order: non-positive value");
    const double x = std::log(resolution[i]);
    const double y = std::log(error[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double m = static_cast<double>(n);
  const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  const double icept = (sy - slope * sx) / m;
  double rss = 0;
  for (std::size_t i = first; i < resolution.size(); ++i) {
    const double r = std::log(error[i]) - (icept + slope * std::log(resolution[i]));
    rss += r * r;
  }
  return OrderFit{-slope, std::sqrt(rss / m)};
}

double l1_error(std::span<const double> simulated, std::span<const double> exact) {
  if (simulated.size() != exact.size()) throw std::invalid_argument("l1_error: size mismatch");
  if (simulated.empty()) return 0.0;
  double s = 0;
  for (std::size_t i = 0; i < simulated.size(); ++i) s += std::abs(simulated[i] - exact[i]);
  return s / static_cast<double>(simulated.size());
}

}  // namespace hypbc
