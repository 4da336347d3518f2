#include "evodepth/sequence_io.hpp"

#include <fstream>

#include <json.hpp>

#include "evodepth/io_util.hpp"

namespace evd {

using nlohmann::json;

void write_depth_frame(const DepthFrame& frame, std::ostream& out, float scale) {
  io::Writer w(out);
  w.magic("ELDR");
  w.le<std::uint16_t>(frame.geom.h);
  w.le<std::uint16_t>(frame.geom.w);
  w.le<std::uint64_t>(frame.t);
  w.f32(scale);
  for (float v : frame.values) w.f32(v / scale);
}

void write_depth_frame(const DepthFrame& frame,
                       const std::filesystem::path& path, float scale) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  write_depth_frame(frame, out, scale);
}

DepthFrame read_depth_frame(std::istream& in) {
  io::Reader r(in);
  r.magic("ELDR", "depth frame header");
  DepthFrame frame;
  frame.geom.h = r.le<std::uint16_t>("height");
  frame.geom.w = r.le<std::uint16_t>("width");
  frame.t = r.le<std::uint64_t>("timestamp");
  const float scale = r.f32("depth scale");
  frame.values.resize(frame.geom.pixels());
  for (float& v : frame.values) v = r.f32("depth value") * scale;
  return frame;
}

DepthFrame read_depth_frame(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return read_depth_frame(in);
}

void write_depth_sequence(const std::vector<DepthFrame>& frames,
                          const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  for (const DepthFrame& f : frames) write_depth_frame(f, out);
}

std::vector<DepthFrame> read_depth_sequence(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<DepthFrame> frames;
  while (true) {
    in.peek();
    if (in.eof()) break;
    frames.push_back(read_depth_frame(in));
  }
  return frames;
}

namespace {

json path_to_json(const PiecewiseLinearPath& p) {
  json keys = json::array();
  for (const auto& [t, v] : p.keys()) {
    keys.push_back({{"t_s", t}, {"x", v.x}, {"y", v.y}, {"z", v.z}});
  }
  return keys;
}

PiecewiseLinearPath path_from_json(const json& j) {
  std::vector<std::pair<double, Vec3>> keys;
  for (const auto& k : j) {
    keys.emplace_back(k.at("t_s").get<double>(),
                      Vec3{k.at("x"), k.at("y"), k.at("z")});
  }
  return PiecewiseLinearPath(std::move(keys));
}

json config_to_json(const SceneConfig& c) {
  return json{{"h", c.h},
              {"w", c.w},
              {"focal_px", c.focal_px},
              {"cx", c.cx},
              {"cy", c.cy},
              {"rate_hz", c.rate_hz},
              {"duration_s", c.duration_s},
              {"contrast_c", c.contrast_c},
              {"max_range_m", c.max_range_m},
              {"ambient", c.ambient},
              {"noise_rate_hz", c.noise_rate_hz},
              {"light_dir", {c.light_dir.x, c.light_dir.y, c.light_dir.z}},
              {"seed", c.seed}};
}

SceneConfig config_from_json(const json& j) {
  SceneConfig c;
  c.h = j.at("h");
  c.w = j.at("w");
  c.focal_px = j.at("focal_px");
  c.cx = j.at("cx");
  c.cy = j.at("cy");
  c.rate_hz = j.at("rate_hz");
  c.duration_s = j.at("duration_s");
  c.contrast_c = j.at("contrast_c");
  c.max_range_m = j.at("max_range_m");
  c.ambient = j.at("ambient");
  c.noise_rate_hz = j.at("noise_rate_hz");
  c.light_dir = Vec3{j.at("light_dir")[0], j.at("light_dir")[1],
                     j.at("light_dir")[2]};
  c.seed = j.at("seed");
  return c;
}

}  // namespace

void write_sequence(const Sequence& seq, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);

  write_events(seq.events, dir / "events.evt1");
  write_depth_sequence(seq.depth, dir / "depth.eldr");

  json states = json::array();
  for (const SceneState& st : seq.states) {
    json prims = json::array();
    for (const PrimitiveState& ps : st.primitives) {
      prims.push_back({{"distance_m", ps.distance_m}, {"visible", ps.visible}});
    }
    states.push_back(
        {{"t_us", st.t}, {"ego_speed", st.ego_speed}, {"primitives", prims}});
  }
  {
    std::ofstream out(dir / "states.json");
    out << json{{"states", states}}.dump(2) << "\n";
  }

  json prims = json::array();
  for (const Primitive& p : seq.scene.primitives) {
    prims.push_back(
        {{"kind", p.kind == Primitive::Kind::Sphere ? "sphere" : "box"},
         {"path", path_to_json(p.path)},
         {"half_extents", {p.half_extents.x, p.half_extents.y, p.half_extents.z}},
         {"radius", p.radius},
         {"albedo", p.albedo}});
  }
  json manifest{
      {"format", "evodepth-sequence-v1"},
      {"config", config_to_json(seq.scene.config)},
      {"primitives", prims},
      {"ego", path_to_json(seq.scene.ego)},
      {"ground", {{"enabled", seq.scene.has_ground},
                  {"y", seq.scene.ground_y},
                  {"albedo", seq.scene.ground_albedo},
                  {"checker_m", seq.scene.ground_checker_m},
                  {"albedo2", seq.scene.ground_albedo2}}},
      {"files", {{"events", "events.evt1"},
                 {"depth", "depth.eldr"},
                 {"states", "states.json"}}},
      {"frame_count", seq.depth.size()},
      {"event_count", seq.events.size()}};
  std::ofstream out(dir / "manifest.json");
  if (!out) throw DataError("cannot write manifest in " + dir.string());
  out << manifest.dump(2) << "\n";
}

Sequence read_sequence(const std::filesystem::path& dir) {
  std::ifstream mf(dir / "manifest.json");
  if (!mf) throw DataError("missing manifest.json in " + dir.string());
  json manifest;
  try {
    mf >> manifest;
  } catch (const json::exception& e) {
    throw DataError("corrupt manifest in " + dir.string() + ": " + e.what());
  }

  Sequence seq;
  seq.scene.config = config_from_json(manifest.at("config"));
  for (const auto& pj : manifest.at("primitives")) {
    Primitive p;
    p.kind = pj.at("kind") == "sphere" ? Primitive::Kind::Sphere
                                       : Primitive::Kind::Box;
    p.path = path_from_json(pj.at("path"));
    p.half_extents = Vec3{pj.at("half_extents")[0], pj.at("half_extents")[1],
                          pj.at("half_extents")[2]};
    p.radius = pj.at("radius");
    p.albedo = pj.at("albedo");
    seq.scene.primitives.push_back(std::move(p));
  }
  seq.scene.ego = path_from_json(manifest.at("ego"));
  const auto& g = manifest.at("ground");
  seq.scene.has_ground = g.at("enabled");
  seq.scene.ground_y = g.at("y");
  seq.scene.ground_albedo = g.at("albedo");
  seq.scene.ground_checker_m = g.value("checker_m", 0.0);
  seq.scene.ground_albedo2 = g.value("albedo2", seq.scene.ground_albedo);

  const auto& files = manifest.at("files");
  seq.events = read_events(dir / files.at("events").get<std::string>());
  seq.depth = read_depth_sequence(dir / files.at("depth").get<std::string>());

  std::ifstream sf(dir / files.at("states").get<std::string>());
  if (!sf) throw DataError("missing states file in " + dir.string());
  json sj;
  sf >> sj;
  for (const auto& stj : sj.at("states")) {
    SceneState st;
    st.t = stj.at("t_us");
    st.ego_speed = stj.at("ego_speed");
    for (const auto& pj : stj.at("primitives")) {
      st.primitives.push_back(
          PrimitiveState{pj.at("distance_m"), pj.at("visible")});
    }
    seq.states.push_back(std::move(st));
  }
  return seq;
}

}  // namespace evd
