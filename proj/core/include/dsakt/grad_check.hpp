#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace dsakt {

/// A parameter to probe: `values` is perturbed in place, `analytic` holds the gradient under test.
struct GradCheckParameter {
  std::string name;
  std::span<double> values;
  std::span<const double> analytic;
};

struct GradCheckEntry {
  std::string name;
  double max_relative_error = 0.0;
  std::size_t worst_index = 0;
  std::size_t floored = 0;        // elements over tolerance but within absolute_floor
  double max_floored_gap = 0.0;   // largest |analytic - numeric| among them
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double tolerance = 0.0;
  bool passed = true;

  double worst() const;
};

/// |a - b| / max(|a|, |b|, 1e-8)
double relative_error(double analytic, double numeric);

/// Compares `analytic` against central differences of `loss` for every element of every parameter.
/// `loss` must read the current contents of the parameter spans. Values are restored afterwards.
/// An element over `tolerance` still passes when |analytic - numeric| <= absolute_floor; such elements are
/// counted in the entry and excluded from max_relative_error. The default floor of 0 disables this.
/// Throws NumericError naming the parameter if the loss turns non-finite.
GradCheckReport grad_check(const std::function<double()>& loss, std::span<const GradCheckParameter> parameters,
                           double tolerance, double step = 1e-5, double absolute_floor = 0.0);

}  // namespace dsakt
