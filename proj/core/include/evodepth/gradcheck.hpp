#pragma once

#include <functional>

#include "evodepth/autograd.hpp"

namespace evd::nn {

struct GradCheckEntry {
  std::string name;
  double max_rel_err = 0.0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_err = 0.0;
  bool pass = false;
};

// Central-difference check of analytic parameter gradients. `forward`
// rebuilds the loss graph from current parameter values; run it in double
// precision for meaningful tolerances.
template <typename T>
GradCheckReport finite_diff_check(const std::function<Var<T>()>& forward,
                                  const std::vector<Var<T>>& params,
                                  double tolerance, T step = T(1e-5)) {
  for (const auto& p : params) {
    p->grad.fill(T(0));
    p->grad_ready = false;
  }
  backward(forward());

  GradCheckReport report;
  for (const auto& p : params) {
    GradCheckEntry entry{p->name, 0.0};
    for (std::size_t i = 0; i < p->value.size(); ++i) {
      const T orig = p->value[i];
      p->value[i] = orig + step;
      const double up = double(forward()->value[0]);
      p->value[i] = orig - step;
      const double down = double(forward()->value[0]);
      p->value[i] = orig;
      const double numeric = (up - down) / (2.0 * double(step));
      const double analytic = double(p->grad[i]);
      const double denom =
          std::max({1.0, std::abs(numeric), std::abs(analytic)});
      entry.max_rel_err =
          std::max(entry.max_rel_err, std::abs(numeric - analytic) / denom);
    }
    report.max_rel_err = std::max(report.max_rel_err, entry.max_rel_err);
    report.entries.push_back(std::move(entry));
  }
  report.pass = report.max_rel_err <= tolerance;
  return report;
}

}  // namespace evd::nn
