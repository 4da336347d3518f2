#include <doctest.h>

#include <cmath>

#include "evodepth/metrics.hpp"
#include "evodepth/rng.hpp"

using namespace evd;

namespace {

DepthFrame frame_of(Geometry g, std::vector<float> v, std::uint64_t t = 0) {
  DepthFrame f(g, t);
  f.values = std::move(v);
  return f;
}

DepthFrame random_frame(Rng& rng, Geometry g, double invalid_frac = 0.1) {
  DepthFrame f(g, 0);
  for (auto& v : f.values) {
    v = rng.uniform() < invalid_frac ? 0.0f : float(rng.uniform(0.5, 50.0));
  }
  return f;
}

}  // namespace

TEST_CASE("identical frames give zero errors and unit deltas") {
  Rng rng(1);
  Geometry g{8, 8};
  auto f = random_frame(rng, g, 0.2);
  auto m = evaluate_depth(f, f);
  CHECK(m.rmse == 0.0);
  CHECK(m.log_rmse == 0.0);
  CHECK(m.abs_rel == 0.0);
  CHECK(m.sq_rel == 0.0);
  CHECK(m.delta1 == 1.0);
  CHECK(m.delta2 == 1.0);
  CHECK(m.delta3 == 1.0);
}

TEST_CASE("the 4-vs-5 boundary obeys the strict inequality") {
  Geometry g{1, 1};
  auto pred = frame_of(g, {5.0f});
  auto target = frame_of(g, {4.0f});
  auto m = evaluate_depth(pred, target);
  CHECK(m.delta1 == 0.0);  // max ratio exactly 1.25, not < 1.25
  CHECK(m.delta2 == 1.0);
  CHECK(m.delta3 == 1.0);
  CHECK(m.abs_rel == doctest::Approx(0.25));
  CHECK(m.rmse == doctest::Approx(1.0));
}

TEST_CASE("matches a direct per-pixel reference on random pairs") {
  Rng rng(2);
  Geometry g{8, 8};
  for (int trial = 0; trial < 50; ++trial) {
    auto pred = random_frame(rng, g);
    auto target = random_frame(rng, g);
    DepthMetrics m;
    bool ok = true;
    try {
      m = evaluate_depth(pred, target);
    } catch (const DataError&) {
      ok = false;
    }

    double se = 0, lse = 0, ar = 0, sr = 0;
    std::uint64_t n = 0, d1 = 0, d2 = 0, d3 = 0;
    for (std::size_t i = 0; i < pred.values.size(); ++i) {
      const double t = target.values[i];
      double p = pred.values[i];
      if (t <= 0 || p <= 0) continue;
      p = std::max(p, kPredFloor);
      ++n;
      se += (p - t) * (p - t);
      lse += (std::log(p) - std::log(t)) * (std::log(p) - std::log(t));
      ar += std::abs(p - t) / t;
      sr += (p - t) * (p - t) / t;
      const double ratio = std::max(p / t, t / p);
      d1 += ratio < 1.25;
      d2 += ratio < 1.5625;
      d3 += ratio < 1.953125;
    }
    if (n == 0) {
      CHECK_FALSE(ok);
      continue;
    }
    REQUIRE(ok);
    CHECK(m.valid_px == n);
    CHECK(m.rmse == doctest::Approx(std::sqrt(se / n)).epsilon(1e-9));
    CHECK(m.log_rmse == doctest::Approx(std::sqrt(lse / n)).epsilon(1e-9));
    CHECK(m.abs_rel == doctest::Approx(ar / n).epsilon(1e-9));
    CHECK(m.sq_rel == doctest::Approx(sr / n).epsilon(1e-9));
    CHECK(m.delta1 == doctest::Approx(double(d1) / n));
    CHECK(m.delta2 == doctest::Approx(double(d2) / n));
    CHECK(m.delta3 == doctest::Approx(double(d3) / n));
    CHECK(m.delta1 <= m.delta2);
    CHECK(m.delta2 <= m.delta3);
  }
}

TEST_CASE("delta criterion is symmetric in pred and target") {
  Rng rng(3);
  Geometry g{8, 8};
  auto a = random_frame(rng, g, 0.0);
  auto b = random_frame(rng, g, 0.0);
  auto m1 = evaluate_depth(a, b);
  auto m2 = evaluate_depth(b, a);
  CHECK(m1.delta1 == doctest::Approx(m2.delta1));
  CHECK(m1.delta2 == doctest::Approx(m2.delta2));
  CHECK(m1.delta3 == doctest::Approx(m2.delta3));
}

TEST_CASE("empty valid mask is rejected") {
  Geometry g{2, 2};
  auto zero = frame_of(g, {0, 0, 0, 0});
  auto some = frame_of(g, {1, 1, 1, 1});
  CHECK_THROWS_AS(evaluate_depth(some, zero), DataError);
  CHECK_THROWS_AS(evaluate_depth(zero, some), DataError);
  auto wrong = DepthFrame(Geometry{3, 3}, 0);
  CHECK_THROWS_AS(evaluate_depth(wrong, some), ConfigError);
}

TEST_CASE("aggregation pools pixels exactly") {
  Rng rng(4);
  Geometry g{8, 8};

  auto f = random_frame(rng, g);
  auto t = random_frame(rng, g);
  auto single = evaluate_depth(f, t);
  auto agg1 = aggregate({single});
  CHECK(agg1.rmse == doctest::Approx(single.rmse));
  CHECK(agg1.valid_px == single.valid_px);

  auto agg2 = aggregate({single, single});
  CHECK(agg2.rmse == doctest::Approx(single.rmse));
  CHECK(agg2.abs_rel == doctest::Approx(single.abs_rel));
  CHECK(agg2.delta1 == doctest::Approx(single.delta1));
  CHECK(agg2.valid_px == 2 * single.valid_px);

  // pooled recomputation oracle: concatenate two frames side by side
  auto f2 = random_frame(rng, g);
  auto t2 = random_frame(rng, g);
  auto m2 = evaluate_depth(f2, t2);
  auto agg = aggregate({single, m2});

  Geometry wide{8, 16};
  DepthFrame fcat(wide, 0), tcat(wide, 0);
  for (int y = 0; y < 8; ++y) {
    for (int x = 0; x < 8; ++x) {
      fcat.values[y * 16 + x] = f.values[y * 8 + x];
      tcat.values[y * 16 + x] = t.values[y * 8 + x];
      fcat.values[y * 16 + 8 + x] = f2.values[y * 8 + x];
      tcat.values[y * 16 + 8 + x] = t2.values[y * 8 + x];
    }
  }
  auto whole = evaluate_depth(fcat, tcat);
  CHECK(agg.rmse == doctest::Approx(whole.rmse).epsilon(1e-12));
  CHECK(agg.log_rmse == doctest::Approx(whole.log_rmse).epsilon(1e-12));
  CHECK(agg.abs_rel == doctest::Approx(whole.abs_rel).epsilon(1e-12));
  CHECK(agg.sq_rel == doctest::Approx(whole.sq_rel).epsilon(1e-12));
  CHECK(agg.delta1 == doctest::Approx(whole.delta1));
  CHECK(agg.valid_px == whole.valid_px);

  CHECK_THROWS_AS(aggregate({}), DataError);
}
