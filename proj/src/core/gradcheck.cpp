#include "core/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "core/errors.hpp"

namespace attnfc {

GradCheckReport finite_diff_check(const ScalarFn& f, std::vector<Tensor> params,
                                  const std::vector<Tensor>& analytic, double step,
                                  double tolerance, const std::vector<std::string>& names) {
  if (params.size() != analytic.size()) {
    throw ContractError("finite_diff_check: parameter/gradient count mismatch");
  }
  GradCheckReport report;
  for (std::size_t p = 0; p < params.size(); ++p) {
    if (!params[p].same_shape(analytic[p])) {
      throw DimensionError("finite_diff_check: gradient shape " + analytic[p].shape_str() +
                           " does not match parameter " + params[p].shape_str());
    }
    for (std::size_t i = 0; i < params[p].size(); ++i) {
      double saved = params[p][i];
      params[p][i] = saved + step;
      double up = f(params);
      params[p][i] = saved - step;
      double down = f(params);
      params[p][i] = saved;
      double numeric = (up - down) / (2.0 * step);
      double a = analytic[p][i];
      double denom = std::max({std::fabs(a), std::fabs(numeric), 1e-8});
      double rel = std::fabs(a - numeric) / denom;
      report.max_rel_error = std::max(report.max_rel_error, rel);
      ++report.checked;
      if (rel > tolerance) {
        std::string name = p < names.size() ? names[p] : "param" + std::to_string(p);
        report.failures.push_back({p, i, a, numeric, rel, std::move(name)});
      }
    }
  }
  return report;
}

}  // namespace attnfc
