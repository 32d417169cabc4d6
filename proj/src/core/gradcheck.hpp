#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "core/tensor.hpp"

namespace attnfc {

/// Scalar function of a parameter list, re-evaluated at perturbed points.
/// Must be deterministic for the central differences to mean anything.
using ScalarFn = std::function<double(const std::vector<Tensor>&)>;

struct GradCheckEntry {
  std::size_t param;
  std::size_t index;
  double analytic;
  double numeric;
  double rel_error;
  std::string name;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::size_t checked = 0;
  std::vector<GradCheckEntry> failures;
  bool ok() const { return failures.empty(); }
};

/// Compares `analytic` gradients against central differences
/// (f(p+ε)−f(p−ε))/2ε per scalar entry. Relative error uses
/// max(|analytic|, |numeric|, 1e-8) as denominator; entries above
/// `tolerance` land in the report's failure list.
GradCheckReport finite_diff_check(const ScalarFn& f, std::vector<Tensor> params,
                                  const std::vector<Tensor>& analytic, double step,
                                  double tolerance,
                                  const std::vector<std::string>& names = {});

}  // namespace attnfc
