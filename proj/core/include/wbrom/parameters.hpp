#pragma once

#include <vector>

namespace wbrom {

/// z = (t, y): snapshot time in years and the physical parameter vector.
struct ParameterPoint {
  double t = 0.0;
  std::vector<double> y;

  /// (t, y_1, ..., y_p), the coordinate order used by tensor-grid tables.
  std::vector<double> coordinates() const {
    std::vector<double> out;
    out.reserve(y.size() + 1);
    out.push_back(t);
    out.insert(out.end(), y.begin(), y.end());
    return out;
  }

  static ParameterPoint from_coordinates(const std::vector<double>& c) {
    ParameterPoint z;
    if (!c.empty()) {
      z.t = c.front();
      z.y.assign(c.begin() + 1, c.end());
    }
    return z;
  }

  bool operator==(const ParameterPoint&) const = default;
};

}  // namespace wbrom
