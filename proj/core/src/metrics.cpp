#include "evodepth/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "evodepth/errors.hpp"

namespace evd {

namespace {

void finalize(DepthMetrics& m) {
  const double n = double(m.valid_px);
  m.rmse = std::sqrt(m.se_sum / n);
  m.log_rmse = std::sqrt(m.log_se_sum / n);
  m.abs_rel = m.abs_rel_sum / n;
  m.sq_rel = m.sq_rel_sum / n;
  m.delta1 = double(m.d1_count) / n;
  m.delta2 = double(m.d2_count) / n;
  m.delta3 = double(m.d3_count) / n;
}

}  // namespace

DepthMetrics evaluate_depth(const DepthFrame& pred, const DepthFrame& target) {
  if (!(pred.geom == target.geom)) {
    throw ConfigError("metric geometry mismatch");
  }
  DepthMetrics m;
  for (std::size_t i = 0; i < target.values.size(); ++i) {
    const double d = target.values[i];
    const double raw = pred.values[i];
    if (d <= 0.0 || raw <= 0.0) continue;
    const double dh = std::max(raw, kPredFloor);
    const double err = d - dh;
    m.se_sum += err * err;
    const double lerr = std::log(d) - std::log(dh);
    m.log_se_sum += lerr * lerr;
    m.abs_rel_sum += std::abs(err) / d;
    m.sq_rel_sum += err * err / d;
    const double ratio = std::max(d / dh, dh / d);
    // strict inequality: ratio exactly 1.25 does not count for delta1
    if (ratio < 1.25) ++m.d1_count;
    if (ratio < 1.5625) ++m.d2_count;
    if (ratio < 1.953125) ++m.d3_count;
    ++m.valid_px;
  }
  if (m.valid_px == 0) {
    throw DataError("no jointly valid pixels for depth metrics");
  }
  finalize(m);
  return m;
}

DepthMetrics aggregate(const std::vector<DepthMetrics>& frames) {
  if (frames.empty()) throw DataError("cannot aggregate zero frames");
  DepthMetrics m;
  for (const DepthMetrics& f : frames) {
    m.se_sum += f.se_sum;
    m.log_se_sum += f.log_se_sum;
    m.abs_rel_sum += f.abs_rel_sum;
    m.sq_rel_sum += f.sq_rel_sum;
    m.d1_count += f.d1_count;
    m.d2_count += f.d2_count;
    m.d3_count += f.d3_count;
    m.valid_px += f.valid_px;
  }
  finalize(m);
  return m;
}

}  // namespace evd
