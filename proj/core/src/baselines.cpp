#include "evodepth/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "evodepth/errors.hpp"

namespace evd {

DepthFrame baseline_repeat(const DepthFrame& prior, std::uint64_t t1) {
  DepthFrame out = prior;
  out.t = t1;
  return out;
}

DepthFrame baseline_linear(std::span<const DepthFrame> history,
                           std::uint64_t t1) {
  if (history.size() < 2) {
    throw DataError("linear baseline needs at least two history frames");
  }
  for (std::size_t i = 1; i < history.size(); ++i) {
    if (!(history[i].geom == history[0].geom)) {
      throw DataError("linear baseline history geometry mismatch");
    }
  }
  const std::size_t k = history.size();
  const double t_ref = double(history[0].t);
  std::vector<double> ts(k);
  double t_mean = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    ts[i] = (double(history[i].t) - t_ref) * 1e-6;
    t_mean += ts[i];
  }
  t_mean /= double(k);
  double stt = 0.0;
  for (double t : ts) stt += (t - t_mean) * (t - t_mean);
  const double t_eval = (double(t1) - t_ref) * 1e-6;

  DepthFrame out(history[0].geom, t1);
  for (std::size_t p = 0; p < out.values.size(); ++p) {
    bool valid = true;
    for (std::size_t i = 0; i < k; ++i) {
      if (history[i].values[p] <= 0.0f) {
        valid = false;
        break;
      }
    }
    if (!valid) continue;
    double d_mean = 0.0;
    for (std::size_t i = 0; i < k; ++i) d_mean += history[i].values[p];
    d_mean /= double(k);
    double std_ = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      std_ += (ts[i] - t_mean) * (double(history[i].values[p]) - d_mean);
    }
    const double slope = stt > 0 ? std_ / stt : 0.0;
    const double pred = d_mean + slope * (t_eval - t_mean);
    out.values[p] = float(std::max(0.0, pred));
  }
  return out;
}

DepthFrame baseline_exponential(const DepthFrame& prev, const DepthFrame& curr,
                                std::uint64_t t1) {
  if (!(prev.geom == curr.geom)) {
    throw DataError("exponential baseline geometry mismatch");
  }
  if (curr.t <= prev.t) {
    throw DataError("exponential baseline needs increasing timestamps");
  }
  const double dt_hist = double(curr.t - prev.t);
  const double dt_pred = double(t1) - double(curr.t);
  const double expo = dt_pred / dt_hist;

  DepthFrame out(curr.geom, t1);
  for (std::size_t p = 0; p < out.values.size(); ++p) {
    const double d_prev = prev.values[p];
    const double d_curr = curr.values[p];
    if (d_prev <= 0.0 || d_curr <= 0.0) continue;
    const double ratio = d_curr / d_prev;
    // cap the growth so runaway ratios stay finite
    const double pred =
        d_curr * std::exp(std::clamp(expo * std::log(ratio), -30.0, 30.0));
    out.values[p] = float(std::min(pred, 1e6));
  }
  return out;
}

}  // namespace evd
