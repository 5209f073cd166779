#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "gwla/param_store.hpp"

namespace gwla {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  size_t checked = 0;
  bool finite = true;

  bool passes(double tol) const { return finite && max_rel_error < tol; }
};

/// A coordinate to perturb: (block name, flat index within the block).
struct ParamCoord {
  std::string block;
  size_t index;
};

/// Central finite differences against an analytic gradient.
/// `loss_fn` must recompute the scalar loss from the store's current values;
/// `analytic` holds dLoss/dParam in its grad buffers for the same values.
/// Relative error: |a - n| / max(1e-4, |a| + |n|). The floor makes the
/// check equivalent to |a - n| <= atol + rtol*(|a| + |n|) with
/// atol = 1e-4 * rtol: sampled coordinates can land arbitrarily close to a
/// gradient zero crossing, where secant roundoff (~1 ulp of the loss over
/// 2*eps, measured around 5e-11 here) swamps any relative comparison while
/// an absolute one stays meaningful. A coordinate disagreeing past 1e-6 at the primary
/// epsilon is retried at epsilon/3 and 3*epsilon and keeps its best
/// agreement: a secant that crosses a relu kink at one step width does not
/// cross it at a smaller one, and roundoff shrinks at a larger one, while a
/// wrong analytic gradient fails at every width. Non-finite anywhere is a
/// failure regardless of magnitude.
inline GradCheckResult finite_difference_check(
    ParamStoreD& params, const ParamStoreD& analytic,
    const std::function<double(const ParamStoreD&)>& loss_fn, const std::vector<ParamCoord>& coords,
    double epsilon = 1e-5) {
  GradCheckResult res;
  for (const ParamCoord& c : coords) {
    auto& blk = params.block(c.block);
    const double saved = blk.value.data[c.index];
    const double a = analytic.block(c.block).grad.data[c.index];

    auto secant = [&](double eps) {
      blk.value.data[c.index] = saved + eps;
      double up = loss_fn(params);
      blk.value.data[c.index] = saved - eps;
      double down = loss_fn(params);
      blk.value.data[c.index] = saved;
      return (up - down) / (2.0 * eps);
    };
    auto rel_of = [&](double numeric) {
      return std::fabs(a - numeric) / std::max(1e-4, std::fabs(a) + std::fabs(numeric));
    };

    double numeric = secant(epsilon);
    bool bad = !std::isfinite(numeric) || !std::isfinite(a);
    double rel = bad ? std::numeric_limits<double>::infinity() : rel_of(numeric);
    if (!bad && rel > 1e-6) {
      for (double eps : {epsilon / 3.0, 3.0 * epsilon}) {
        double retry = secant(eps);
        if (!std::isfinite(retry)) {
          bad = true;
          numeric = retry;
          break;
        }
        if (rel_of(retry) < rel) {
          rel = rel_of(retry);
          numeric = retry;
        }
      }
    }
    if (bad) {
      res.finite = false;
      res.worst_param = c.block;
      res.worst_index = c.index;
      res.analytic = a;
      res.numeric = numeric;
      res.max_rel_error = std::numeric_limits<double>::infinity();
      return res;
    }
    if (rel > res.max_rel_error) {
      res.max_rel_error = rel;
      res.worst_param = c.block;
      res.worst_index = c.index;
      res.analytic = a;
      res.numeric = numeric;
    }
    ++res.checked;
  }
  return res;
}

/// Every coordinate of every block (for small stores).
inline std::vector<ParamCoord> all_coords(const ParamStoreD& params) {
  std::vector<ParamCoord> out;
  for (const auto& b : params.blocks)
    for (size_t i = 0; i < b.value.data.size(); ++i) out.push_back({b.name, i});
  return out;
}

}  // namespace gwla
