#include "carasel/check.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>

namespace carasel {

Check make_check(std::string name, double residual, double tolerance, std::string detail) {
  const bool pass = std::isinf(tolerance) ? std::isfinite(residual) : residual <= tolerance;
  return Check{std::move(name), residual, tolerance, pass, std::move(detail)};
}

Check make_strict_check(std::string name, double residual, double tolerance, std::string detail) {
  return Check{std::move(name), residual, tolerance, residual < tolerance, std::move(detail)};
}

bool all_pass(const std::vector<Check>& checks) {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

std::string format_number(double x) {
  char buf[32];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

}  // namespace carasel
