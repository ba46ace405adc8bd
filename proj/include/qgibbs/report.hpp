#pragma once

// Outcome of evaluating one inequality: the exact left side, the bound and
// the inputs that produced them.

#include <map>
#include <string>

namespace qgibbs {

struct BoundReport {
  std::string id;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // rhs - lhs
  std::map<std::string, double> params;
  std::string regions;

  [[nodiscard]] bool holds(double tol = 1e-9) const { return margin >= -tol; }
};

inline BoundReport make_bound(std::string id, double lhs, double rhs) {
  BoundReport r;
  r.id = std::move(id);
  r.lhs = lhs;
  r.rhs = rhs;
  r.margin = rhs - lhs;
  return r;
}

/// "key=value;key=value" rendering of the parameters.
std::string format_params(const BoundReport& r);

}  // namespace qgibbs
