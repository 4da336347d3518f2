#include "evodepth/checkpoint.hpp"

#include <fstream>

#include "evodepth/io_util.hpp"

namespace evd::nn {

namespace {

constexpr std::uint32_t kFormatVersion = 1;

void write_tensor(io::Writer& w, const std::string& name,
                  const Tensor<float>& t) {
  w.le<std::uint32_t>(std::uint32_t(name.size()));
  w.bytes(name.data(), name.size());
  w.le<std::uint8_t>(4);
  for (int d : t.dims()) w.le<std::uint32_t>(std::uint32_t(d));
  for (std::size_t i = 0; i < t.size(); ++i) w.f32(t[i]);
}

std::pair<std::string, Tensor<float>> read_tensor(io::Reader& r) {
  const std::uint32_t len = r.le<std::uint32_t>("parameter name length");
  std::string name(len, '\0');
  r.bytes(name.data(), len, "parameter name");
  const std::uint8_t rank = r.le<std::uint8_t>("tensor rank");
  if (rank != 4) {
    throw FormatError("unsupported tensor rank " + std::to_string(rank),
                      r.offset() - 1);
  }
  std::uint32_t dims[4];
  for (auto& d : dims) d = r.le<std::uint32_t>("tensor dim");
  Tensor<float> t{int(dims[0]), int(dims[1]), int(dims[2]), int(dims[3])};
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = r.f32("tensor value");
  return {std::move(name), std::move(t)};
}

}  // namespace

void save_checkpoint(const std::vector<Var<float>>& params,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  io::Writer w(out);
  w.magic("NLNN");
  w.le<std::uint32_t>(kFormatVersion);
  w.le<std::uint32_t>(std::uint32_t(params.size()));
  for (const auto& p : params) write_tensor(w, p->name, p->value);
}

std::vector<std::pair<std::string, Tensor<float>>> read_checkpoint(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  io::Reader r(in);
  r.magic("NLNN", "checkpoint header");
  const std::uint32_t version = r.le<std::uint32_t>("format version");
  if (version != kFormatVersion) {
    throw FormatError("unsupported checkpoint version " +
                          std::to_string(version),
                      4);
  }
  const std::uint32_t count = r.le<std::uint32_t>("parameter count");
  std::vector<std::pair<std::string, Tensor<float>>> out;
  out.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) out.push_back(read_tensor(r));
  return out;
}

void load_checkpoint(const std::vector<Var<float>>& params,
                     const std::filesystem::path& path) {
  auto entries = read_checkpoint(path);
  for (const auto& p : params) {
    bool found = false;
    for (auto& [name, tensor] : entries) {
      if (name != p->name) continue;
      if (!tensor.same_shape(p->value)) {
        throw DataError("checkpoint parameter " + name + " has shape " +
                        tensor.shape_str() + ", model expects " +
                        p->value.shape_str());
      }
      p->value = std::move(tensor);
      found = true;
      break;
    }
    if (!found) {
      throw DataError("checkpoint " + path.string() +
                      " missing parameter " + p->name);
    }
  }
}

void save_optimizer_state(const Nadam<float>& opt,
                          const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  io::Writer w(out);
  w.magic("NLOS");
  w.le<std::uint32_t>(kFormatVersion);
  w.le<std::uint64_t>(std::uint64_t(opt.step_count()));
  w.le<std::uint32_t>(std::uint32_t(opt.params().size()));
  auto& self = const_cast<Nadam<float>&>(opt);
  for (std::size_t i = 0; i < opt.params().size(); ++i) {
    write_tensor(w, opt.params()[i]->name + ".m", self.first_moments()[i]);
    write_tensor(w, opt.params()[i]->name + ".v", self.second_moments()[i]);
  }
}

void load_optimizer_state(Nadam<float>& opt,
                          const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  io::Reader r(in);
  r.magic("NLOS", "optimizer state header");
  const std::uint32_t version = r.le<std::uint32_t>("format version");
  if (version != kFormatVersion) {
    throw FormatError("unsupported optimizer state version " +
                          std::to_string(version),
                      4);
  }
  opt.set_step_count(std::int64_t(r.le<std::uint64_t>("step count")));
  const std::uint32_t count = r.le<std::uint32_t>("parameter count");
  if (count != opt.params().size()) {
    throw DataError("optimizer state has " + std::to_string(count) +
                    " entries, model has " +
                    std::to_string(opt.params().size()));
  }
  for (std::uint32_t i = 0; i < count; ++i) {
    auto [mname, m] = read_tensor(r);
    auto [vname, v] = read_tensor(r);
    if (!m.same_shape(opt.params()[i]->value) ||
        !v.same_shape(opt.params()[i]->value)) {
      throw DataError("optimizer state shape mismatch for " + mname);
    }
    opt.first_moments()[i] = std::move(m);
    opt.second_moments()[i] = std::move(v);
  }
}

}  // namespace evd::nn
