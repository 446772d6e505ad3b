#include "dsakt/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "dsakt/error.hpp"

namespace dsakt {

double GradCheckReport::worst() const {
  double w = 0.0;
  for (const auto& e : entries) w = std::max(w, e.max_relative_error);
  return w;
}

double relative_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / scale;
}

GradCheckReport grad_check(const std::function<double()>& loss, std::span<const GradCheckParameter> parameters,
                           double tolerance, double step, double absolute_floor) {
  GradCheckReport report;
  report.tolerance = tolerance;
  for (const auto& p : parameters) {
    if (p.values.size() != p.analytic.size())
      throw ShapeError("grad_check: '" + p.name + "' has " + std::to_string(p.values.size()) + " values but " +
                       std::to_string(p.analytic.size()) + " gradient entries");
    GradCheckEntry entry{p.name, 0.0, 0, 0, 0.0};
    for (std::size_t i = 0; i < p.values.size(); ++i) {
      if (!std::isfinite(p.analytic[i])) throw NumericError("grad_check: non-finite analytic gradient in '" + p.name + "'");
      const double saved = p.values[i];
      p.values[i] = saved + step;
      const double up = loss();
      p.values[i] = saved - step;
      const double down = loss();
      p.values[i] = saved;
      if (!std::isfinite(up) || !std::isfinite(down))
        throw NumericError("grad_check: non-finite loss while probing '" + p.name + "'");
      const double numeric = (up - down) / (2.0 * step);
      const double err = relative_error(p.analytic[i], numeric);
      const double gap = std::abs(p.analytic[i] - numeric);
      if (err >= tolerance && gap <= absolute_floor) {
        ++entry.floored;
        entry.max_floored_gap = std::max(entry.max_floored_gap, gap);
        continue;
      }
      if (err > entry.max_relative_error) {
        entry.max_relative_error = err;
        entry.worst_index = i;
      }
    }
    report.passed = report.passed && entry.max_relative_error < tolerance;
    report.entries.push_back(std::move(entry));
  }
  return report;
}

}  // namespace dsakt
