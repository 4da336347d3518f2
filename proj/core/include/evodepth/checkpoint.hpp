#pragma once

#include <filesystem>

#include "evodepth/optim.hpp"

namespace evd::nn {

// "NLNN" checkpoint: version u32, parameter count u32, then per parameter
// u32 name length + name, u8 rank, u32 dims[], f32 values.
void save_checkpoint(const std::vector<Var<float>>& params,
                     const std::filesystem::path& path);

// Loads values into matching parameters by name; throws DataError on a
// missing or shape-mismatched entry.
void load_checkpoint(const std::vector<Var<float>>& params,
                     const std::filesystem::path& path);

// Raw read, for inspection tooling.
std::vector<std::pair<std::string, Tensor<float>>> read_checkpoint(
    const std::filesystem::path& path);

// "NLOS" optimizer state: version u32, step u64, then per parameter the
// first and second moment tensors in checkpoint layout.
void save_optimizer_state(const Nadam<float>& opt,
                          const std::filesystem::path& path);
void load_optimizer_state(Nadam<float>& opt,
                          const std::filesystem::path& path);

}  // namespace evd::nn
