#include <doctest.h>

#include "evodepth/config.hpp"
#include "evodepth/dataset.hpp"
#include "evodepth/errors.hpp"

using namespace evd;

TEST_CASE("config parsing basics") {
  const std::string text =
      "# run settings\n"
      "[scene]\n"
      "duration_s = 2.5   # seconds\n"
      "count=3\n"
      "  spaced_key   =   spaced value  \n"
      "[pipeline]\n"
      "rate_hz = 10\n"
      "enabled = true\n"
      "fps_set = 2, 5, 10\n";
  auto cfg = ConfigFile::parse(text);

  CHECK(cfg.text() == text);
  CHECK(cfg.has("scene", "duration_s"));
  CHECK_FALSE(cfg.has("scene", "rate_hz"));
  CHECK_FALSE(cfg.has("missing", "duration_s"));

  CHECK(cfg.get_double("scene", "duration_s", 0) == 2.5);
  CHECK(cfg.get_int("scene", "count", 0) == 3);
  CHECK(cfg.get("scene", "spaced_key", "") == "spaced value");
  CHECK(cfg.get_bool("pipeline", "enabled", false));
  CHECK(cfg.get_bool("pipeline", "absent", true));
  CHECK(cfg.get_double("pipeline", "absent", 7.5) == 7.5);

  const auto list = cfg.get_list("pipeline", "fps_set", {});
  REQUIRE(list.size() == 3);
  CHECK(list[0] == 2);
  CHECK(list[1] == 5);
  CHECK(list[2] == 10);
}

TEST_CASE("config parse errors carry line numbers") {
  CHECK_THROWS_WITH_AS(ConfigFile::parse("[scene\n"),
                       doctest::Contains("line 1"), ConfigError);
  CHECK_THROWS_WITH_AS(ConfigFile::parse("[ok]\nnot a pair\n"),
                       doctest::Contains("line 2"), ConfigError);
  CHECK_THROWS_AS(ConfigFile::parse("[s]\n= value\n"), ConfigError);
  CHECK_THROWS_AS(ConfigFile::parse("[]\n"), ConfigError);
}

TEST_CASE("config value errors") {
  auto cfg = ConfigFile::parse(
      "[s]\n"
      "num = 3.5oops\n"
      "word = hello\n"
      "flag = maybe\n"
      "list = 1, x, 3\n");
  CHECK_THROWS_AS(cfg.get_double("s", "num", 0), ConfigError);
  CHECK_THROWS_AS(cfg.get_int("s", "word", 0), ConfigError);
  CHECK_THROWS_AS(cfg.get_bool("s", "flag", false), ConfigError);
  CHECK_THROWS_AS(cfg.get_list("s", "list", {}), ConfigError);
}

TEST_CASE("missing config file is a config error") {
  CHECK_THROWS_AS(ConfigFile::load("/nonexistent/path.cfg"), ConfigError);
}

namespace {

SceneConfig small_config() {
  SceneConfig c;
  c.h = 32;
  c.w = 32;
  c.focal_px = 32;
  c.cx = 16;
  c.cy = 16;
  c.rate_hz = 100;
  c.duration_s = 1.0;
  return c;
}

}  // namespace

TEST_CASE("detector dataset covers every full window with oracle labels") {
  Scene scene = make_desk_scene(3, small_config());
  Sequence seq = generate_sequence(scene);

  DetectorDatasetConfig cfg;
  auto samples = build_detector_samples(seq, 7, cfg);
  REQUIRE(samples.size() == 50);  // 1 s / 20 ms

  for (std::size_t k = 0; k < samples.size(); ++k) {
    const auto& s = samples[k];
    CHECK(s.sequence == 7);
    const std::uint64_t t0 = k * cfg.window_us;
    const auto prev = scene_state_at(seq, t0);
    const auto now = scene_state_at(seq, t0 + cfg.window_us);
    CHECK(s.label == label_keyframe(prev, now, cfg.rules).keyframe);
  }
}

TEST_CASE("fixed-rate frame pairs follow the period grid") {
  Scene scene = make_desk_scene(5, small_config());
  Sequence seq = generate_sequence(scene);

  auto pairs = fixed_fps_pairs(seq, 10.0);
  REQUIRE(!pairs.empty());
  const std::uint64_t period = seq.scene.config.frame_period_us();
  for (const auto& p : pairs) {
    const std::uint64_t gap = seq.depth[p.target_idx].t - seq.depth[p.prior_idx].t;
    CHECK(gap == 100000);
    CHECK(seq.depth[p.prior_idx].t % period == 0);
  }
  // 1 s at 10 fps: priors at 0..0.9 s with targets one period on
  CHECK(pairs.size() == 10);

  auto sparse = fixed_fps_pairs(seq, 2.0);
  CHECK(sparse.size() == 2);
}

TEST_CASE("adaptive extrapolation samples are deterministic and well formed") {
  Scene scene = make_desk_scene(9, small_config());
  Sequence seq = generate_sequence(scene);

  ExtrapDatasetConfig cfg;
  cfg.samples_per_sequence = 10;
  cfg.seed = 4;
  auto a = build_extrap_samples(seq, cfg);
  auto b = build_extrap_samples(seq, cfg);
  REQUIRE(a.size() == b.size());
  REQUIRE(!a.empty());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].prior == b[i].prior);
    CHECK(a[i].voxel == b[i].voxel);
    CHECK(a[i].target == b[i].target);
    CHECK(a[i].mask == b[i].mask);
  }

  cfg.seed = 5;
  auto c = build_extrap_samples(seq, cfg);
  bool any_diff = c.size() != a.size();
  for (std::size_t i = 0; !any_diff && i < c.size(); ++i) {
    any_diff = !(a[i].prior == c[i].prior);
  }
  CHECK(any_diff);

  for (const auto& s : a) {
    CHECK(s.voxel.c() == cfg.bins);
    // mask marks exactly the valid target pixels
    for (std::size_t i = 0; i < s.mask.size(); ++i) {
      CHECK(s.mask[i] == (s.target[i] > 0 ? 1.0f : 0.0f));
    }
  }
}
