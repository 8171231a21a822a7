#pragma once

#include <string>
#include <vector>

namespace carasel {

/// One named, numeric verification result. A non-finite tolerance means "finite residual required".
struct Check {
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;
};

/// pass iff residual <= tolerance (or residual finite when tolerance is +inf).
Check make_check(std::string name, double residual, double tolerance, std::string detail = {});
/// pass iff residual < tolerance; for the open eps-neighbourhood tests.
Check make_strict_check(std::string name, double residual, double tolerance, std::string detail = {});

bool all_pass(const std::vector<Check>& checks);

/// Shortest round-trippable decimal form of x, for messages and details.
std::string format_number(double x);

}  // namespace carasel
