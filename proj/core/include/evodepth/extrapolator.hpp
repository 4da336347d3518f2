#pragma once

#include <filesystem>
#include <span>

#include "evodepth/depth.hpp"
#include "evodepth/nn_ops.hpp"
#include "evodepth/preprocess.hpp"
#include "evodepth/rng.hpp"
#include "evodepth/train_log.hpp"

namespace evd {

// Ablation switches; Full is the dual-encoder U-Net.
enum class ExtrapVariant {
  Full,         // depth + voxel, dual encoders
  NoEvent,      // voxel input zeroed
  EventFrames,  // bin-collapsed event frame replicated across bins
  DataConcat,   // single shared encoder on channel-concatenated input
  NoSkip,       // ResConv without the parallel 1x1 path
};

ExtrapVariant parse_extrap_variant(const std::string& name);
std::string to_string(ExtrapVariant v);

struct ExtrapolatorConfig {
  Geometry geom{64, 64};
  int bins = 5;
  ExtrapVariant variant = ExtrapVariant::Full;
  bool depthwise_separable = false;
  float max_range = 200.0f;
  int base_channels = 16;  // encoder plan c, 2c, 4c; bottleneck 8c

  void validate() const;
};

struct LossWeights {
  float depth = 1.0f;   // lambda_1, fixed
  float grad = 10.0f;   // lambda_2
  float normal = 0.01f; // lambda_3
  float ssim = 1.0f;    // lambda_4
};

// ResConv: ReLU(conv3x3(x) + conv1x1(x)); the 1x1 path is the intra-block
// skip removed by the NoSkip variant.
struct ResConvBlock {
  nn::Var<float> w3, b3, w1, b1;
  nn::Var<float> w_pw, b_pw;  // pointwise stage of the depthwise variant
  bool skip = true;
  bool depthwise = false;

  ResConvBlock() = default;
  ResConvBlock(int cin, int cout, const std::string& name, Rng& rng,
               bool with_skip, bool depthwise_separable);

  nn::Var<float> forward(const nn::Var<float>& x) const;
  void collect_params(std::vector<nn::Var<float>>& out) const;
};

// Dual-encoder U-Net with feature fusion at the bottleneck, decoder skip
// connections from the depth encoder, SoftPlus output head.
class Extrapolator {
 public:
  Extrapolator(const ExtrapolatorConfig& cfg, std::uint64_t seed);

  const ExtrapolatorConfig& config() const { return cfg_; }

  // Inputs and output in normalized units (depth / max_range).
  nn::Var<float> forward(const nn::Var<float>& depth_norm,
                         const nn::Var<float>& voxel_norm) const;

  DepthFrame extrapolate(const DepthFrame& prior, const EventVoxelGrid& voxel,
                         std::uint64_t t1) const;

  std::vector<nn::Var<float>> params() const;
  void save(const std::filesystem::path& path) const;
  void load(const std::filesystem::path& path);

 private:
  ExtrapolatorConfig cfg_;
  // encoders
  ResConvBlock enc_d1_, enc_d2_, enc_d3_;  // depth (or shared, DataConcat)
  ResConvBlock enc_e1_, enc_e2_, enc_e3_;  // events (unused for DataConcat)
  ResConvBlock fuse_;                      // DataConcat only: 4c -> 8c
  ResConvBlock bottleneck_;
  // decoder
  nn::Var<float> t3w_, t3b_, t2w_, t2b_, t1w_, t1b_;
  ResConvBlock dec3_, dec2_, dec1_;
  nn::Var<float> head_w_, head_b_;
};

// Applies the input-level ablations before tensorization.
Tensor<float> prepare_voxel_input(const EventVoxelGrid& voxel,
                                  ExtrapVariant variant);

// Composite training loss over valid-target pixels:
// depth MSE + grad L1 + (1 - normal cosine) + (1 - SSIM)/2, lambda-weighted.
nn::Var<float> total_loss(const nn::Var<float>& pred,
                          const Tensor<float>& target,
                          const Tensor<float>& mask, const LossWeights& w,
                          int ssim_window = 7, float value_range = 1.0f);

struct ExtrapSample {
  Tensor<float> prior;   // (1, 1, H, W) normalized
  Tensor<float> voxel;   // (1, B, H, W) normalized
  Tensor<float> target;  // (1, 1, H, W) normalized
  Tensor<float> mask;    // (1, 1, H, W)
  std::uint64_t t_prior = 0;
  std::uint64_t t_target = 0;
};

struct ExtrapTrainConfig {
  int epochs = 50;
  int batch_size = 16;
  float lr0 = 1e-3f;
  LossWeights weights;
  std::uint64_t seed = 0;
};

// NAdam + cosine annealing; val metric is masked RMSE in normalized units.
std::vector<TrainEpochLog> train_extrapolator(
    Extrapolator& model, const std::vector<ExtrapSample>& train,
    const std::vector<ExtrapSample>& val, const ExtrapTrainConfig& cfg);

}  // namespace evd
