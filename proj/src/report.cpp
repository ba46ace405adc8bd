#include "qgibbs/report.hpp"

#include <sstream>

namespace qgibbs {

std::string format_params(const BoundReport& r) {
  std::ostringstream os;
  os.precision(10);
  bool first = true;
  for (const auto& [k, v] : r.params) {
    if (!first) os << ';';
    os << k << '=' << v;
    first = false;
  }
  return os.str();
}

}  // namespace qgibbs
