#include "hypbc/csv.hpp"

namespace hypbc {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace hypbc
