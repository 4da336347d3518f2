#include "evodepth/extrapolator.hpp"

#include <algorithm>
#include <cmath>

#include "evodepth/checkpoint.hpp"
#include "evodepth/init.hpp"
#include "evodepth/losses.hpp"
#include "evodepth/optim.hpp"

namespace evd {

using nn::Var;

ExtrapVariant parse_extrap_variant(const std::string& name) {
  if (name == "full") return ExtrapVariant::Full;
  if (name == "no-event") return ExtrapVariant::NoEvent;
  if (name == "event-frames") return ExtrapVariant::EventFrames;
  if (name == "data-concat") return ExtrapVariant::DataConcat;
  if (name == "no-skip") return ExtrapVariant::NoSkip;
  throw ConfigError("unknown extrapolator variant '" + name + "'");
}

std::string to_string(ExtrapVariant v) {
  switch (v) {
    case ExtrapVariant::Full: return "full";
    case ExtrapVariant::NoEvent: return "no-event";
    case ExtrapVariant::EventFrames: return "event-frames";
    case ExtrapVariant::DataConcat: return "data-concat";
    case ExtrapVariant::NoSkip: return "no-skip";
  }
  return "full";
}

void ExtrapolatorConfig::validate() const {
  if (geom.h % 8 != 0 || geom.w % 8 != 0) {
    throw ConfigError("extrapolator geometry must be divisible by 8");
  }
  if (bins < 1) throw ConfigError("voxel bins must be positive");
  if (max_range <= 0) throw ConfigError("max range must be positive");
  if (base_channels < 1) throw ConfigError("base channels must be positive");
}

ResConvBlock::ResConvBlock(int cin, int cout, const std::string& name,
                           Rng& rng, bool with_skip, bool depthwise_separable)
    : skip(with_skip), depthwise(depthwise_separable) {
  if (depthwise) {
    w3 = nn::parameter(nn::kaiming_uniform<float>(cin, 1, 3, 3, rng),
                       name + ".dw.w");
    b3 = nn::parameter(nn::zero_bias<float>(cin), name + ".dw.b");
    w_pw = nn::parameter(nn::kaiming_uniform<float>(cout, cin, 1, 1, rng),
                         name + ".pw.w");
    b_pw = nn::parameter(nn::zero_bias<float>(cout), name + ".pw.b");
  } else {
    w3 = nn::parameter(nn::kaiming_uniform<float>(cout, cin, 3, 3, rng),
                       name + ".c3.w");
    b3 = nn::parameter(nn::zero_bias<float>(cout), name + ".c3.b");
  }
  if (skip) {
    w1 = nn::parameter(nn::kaiming_uniform<float>(cout, cin, 1, 1, rng),
                       name + ".c1.w");
    b1 = nn::parameter(nn::zero_bias<float>(cout), name + ".c1.b");
  }
}

Var<float> ResConvBlock::forward(const Var<float>& x) const {
  Var<float> main;
  if (depthwise) {
    main = nn::conv2d(nn::conv2d_depthwise(x, w3, b3, 1, 1), w_pw, b_pw, 1, 0);
  } else {
    main = nn::conv2d(x, w3, b3, 1, 1);
  }
  if (skip) {
    main = nn::add(main, nn::conv2d(x, w1, b1, 1, 0));
  }
  return nn::relu(main);
}

void ResConvBlock::collect_params(std::vector<Var<float>>& out) const {
  out.push_back(w3);
  out.push_back(b3);
  if (depthwise) {
    out.push_back(w_pw);
    out.push_back(b_pw);
  }
  if (skip) {
    out.push_back(w1);
    out.push_back(b1);
  }
}

Extrapolator::Extrapolator(const ExtrapolatorConfig& cfg, std::uint64_t seed)
    : cfg_(cfg) {
  cfg_.validate();
  Rng rng(seed);
  const int c = cfg_.base_channels;
  const bool skip = cfg_.variant != ExtrapVariant::NoSkip;
  const bool dw = cfg_.depthwise_separable;
  const bool shared = cfg_.variant == ExtrapVariant::DataConcat;

  const int enc_in = shared ? 1 + cfg_.bins : 1;
  enc_d1_ = ResConvBlock(enc_in, c, "enc_d1", rng, skip, dw);
  enc_d2_ = ResConvBlock(c, 2 * c, "enc_d2", rng, skip, dw);
  enc_d3_ = ResConvBlock(2 * c, 4 * c, "enc_d3", rng, skip, dw);
  if (!shared) {
    enc_e1_ = ResConvBlock(cfg_.bins, c, "enc_e1", rng, skip, dw);
    enc_e2_ = ResConvBlock(c, 2 * c, "enc_e2", rng, skip, dw);
    enc_e3_ = ResConvBlock(2 * c, 4 * c, "enc_e3", rng, skip, dw);
  } else {
    fuse_ = ResConvBlock(4 * c, 8 * c, "fuse", rng, skip, dw);
  }
  bottleneck_ = ResConvBlock(8 * c, 8 * c, "bottleneck", rng, skip, dw);

  t3w_ = nn::parameter(nn::kaiming_uniform<float>(8 * c, 4 * c, 2, 2, rng),
                       "up3.w");
  t3b_ = nn::parameter(nn::zero_bias<float>(4 * c), "up3.b");
  dec3_ = ResConvBlock(8 * c, 4 * c, "dec3", rng, skip, dw);
  t2w_ = nn::parameter(nn::kaiming_uniform<float>(4 * c, 2 * c, 2, 2, rng),
                       "up2.w");
  t2b_ = nn::parameter(nn::zero_bias<float>(2 * c), "up2.b");
  dec2_ = ResConvBlock(4 * c, 2 * c, "dec2", rng, skip, dw);
  t1w_ = nn::parameter(nn::kaiming_uniform<float>(2 * c, c, 2, 2, rng),
                       "up1.w");
  t1b_ = nn::parameter(nn::zero_bias<float>(c), "up1.b");
  dec1_ = ResConvBlock(2 * c, c, "dec1", rng, skip, dw);

  head_w_ = nn::parameter(nn::kaiming_uniform<float>(1, c, 3, 3, rng),
                          "head.w");
  head_b_ = nn::parameter(nn::zero_bias<float>(1), "head.b");
}

Var<float> Extrapolator::forward(const Var<float>& depth_norm,
                                 const Var<float>& voxel_norm) const {
  const auto& dv = depth_norm->value;
  const auto& vv = voxel_norm->value;
  if (dv.c() != 1 || dv.h() != cfg_.geom.h || dv.w() != cfg_.geom.w) {
    throw ConfigError("extrapolator depth input " + dv.shape_str() +
                      " does not match configured geometry");
  }
  if (vv.c() != cfg_.bins || vv.h() != cfg_.geom.h || vv.w() != cfg_.geom.w ||
      vv.n() != dv.n()) {
    throw ConfigError("extrapolator voxel input " + vv.shape_str() +
                      " does not match configured geometry/bins");
  }

  Var<float> s1, s2, s3, bottom;
  if (cfg_.variant == ExtrapVariant::DataConcat) {
    auto x = nn::concat_channels(depth_norm, voxel_norm);
    s1 = enc_d1_.forward(x);
    s2 = enc_d2_.forward(nn::maxpool2d(s1, 2));
    s3 = enc_d3_.forward(nn::maxpool2d(s2, 2));
    bottom = fuse_.forward(nn::maxpool2d(s3, 2));
  } else {
    s1 = enc_d1_.forward(depth_norm);
    s2 = enc_d2_.forward(nn::maxpool2d(s1, 2));
    s3 = enc_d3_.forward(nn::maxpool2d(s2, 2));
    auto e1 = enc_e1_.forward(voxel_norm);
    auto e2 = enc_e2_.forward(nn::maxpool2d(e1, 2));
    auto e3 = enc_e3_.forward(nn::maxpool2d(e2, 2));
    bottom = nn::concat_channels(nn::maxpool2d(s3, 2), nn::maxpool2d(e3, 2));
  }
  auto b = bottleneck_.forward(bottom);

  auto u3 = nn::conv_transpose2d(b, t3w_, t3b_, 2, 0);
  auto d3 = dec3_.forward(nn::concat_channels(u3, s3));
  auto u2 = nn::conv_transpose2d(d3, t2w_, t2b_, 2, 0);
  auto d2 = dec2_.forward(nn::concat_channels(u2, s2));
  auto u1 = nn::conv_transpose2d(d2, t1w_, t1b_, 2, 0);
  auto d1 = dec1_.forward(nn::concat_channels(u1, s1));

  return nn::softplus(nn::conv2d(d1, head_w_, head_b_, 1, 1));
}

Tensor<float> prepare_voxel_input(const EventVoxelGrid& voxel,
                                  ExtrapVariant variant) {
  if (variant == ExtrapVariant::NoEvent) {
    return Tensor<float>(1, voxel.bins, voxel.geom.h, voxel.geom.w);
  }
  if (variant == ExtrapVariant::EventFrames) {
    // bin-collapsed counts replicated across bins
    EventFrame frame{voxel.geom,
                     std::vector<std::int32_t>(voxel.geom.pixels(), 0)};
    for (int b = 0; b < voxel.bins; ++b) {
      for (std::size_t i = 0; i < frame.values.size(); ++i) {
        frame.values[i] += voxel.values[std::size_t(b) * frame.values.size() + i];
      }
    }
    auto single = event_frame_to_tensor(frame);
    Tensor<float> out(1, voxel.bins, voxel.geom.h, voxel.geom.w);
    for (int b = 0; b < voxel.bins; ++b) {
      std::copy(single.data(), single.data() + single.size(),
                out.data() + std::size_t(b) * single.size());
    }
    return out;
  }
  return voxel_to_tensor(voxel);
}

DepthFrame Extrapolator::extrapolate(const DepthFrame& prior,
                                     const EventVoxelGrid& voxel,
                                     std::uint64_t t1) const {
  if (!(prior.geom == cfg_.geom) || !(voxel.geom == cfg_.geom)) {
    throw ConfigError("extrapolate: geometry mismatch with model");
  }
  auto depth_in = nn::constant(depth_to_tensor(prior, cfg_.max_range));
  auto voxel_in = nn::constant(prepare_voxel_input(voxel, cfg_.variant));
  auto out = forward(depth_in, voxel_in);
  return tensor_to_depth(out->value, 0, cfg_.max_range, t1);
}

std::vector<Var<float>> Extrapolator::params() const {
  std::vector<Var<float>> out;
  enc_d1_.collect_params(out);
  enc_d2_.collect_params(out);
  enc_d3_.collect_params(out);
  if (cfg_.variant == ExtrapVariant::DataConcat) {
    fuse_.collect_params(out);
  } else {
    enc_e1_.collect_params(out);
    enc_e2_.collect_params(out);
    enc_e3_.collect_params(out);
  }
  bottleneck_.collect_params(out);
  out.insert(out.end(), {t3w_, t3b_});
  dec3_.collect_params(out);
  out.insert(out.end(), {t2w_, t2b_});
  dec2_.collect_params(out);
  out.insert(out.end(), {t1w_, t1b_});
  dec1_.collect_params(out);
  out.insert(out.end(), {head_w_, head_b_});
  return out;
}

void Extrapolator::save(const std::filesystem::path& path) const {
  nn::save_checkpoint(params(), path);
}

void Extrapolator::load(const std::filesystem::path& path) {
  nn::load_checkpoint(params(), path);
}

namespace {

// masked mean of |a - b| style sums; mask weights are 0/1 constants
Var<float> masked_mean(const Var<float>& values, const Var<float>& mask,
                       float count) {
  return nn::mul_scalar(nn::sum(nn::mul(values, mask)), 1.0f / count);
}

float mask_count(const Tensor<float>& m) {
  float c = 0;
  for (std::size_t i = 0; i < m.size(); ++i) c += m[i];
  return c;
}

}  // namespace

Var<float> total_loss(const Var<float>& pred, const Tensor<float>& target,
                      const Tensor<float>& mask, const LossWeights& w,
                      int ssim_window, float value_range) {
  check_same_shape(pred->value, target, "total_loss");
  check_same_shape(pred->value, mask, "total_loss mask");
  const float n_valid = mask_count(mask);
  if (n_valid < 1.0f) {
    throw DataError("total_loss: target has no valid pixels");
  }
  const int h = target.h(), wd = target.w();
  auto t = nn::constant(target);
  auto m = nn::constant(mask);

  // depth term, masked MSE
  auto err = nn::sub(pred, t);
  auto l_depth = masked_mean(nn::square(err), m, n_valid);

  // forward differences
  auto dxp = nn::sub(nn::crop(pred, 0, 1, h, wd - 1),
                     nn::crop(pred, 0, 0, h, wd - 1));
  auto dxt = nn::sub(nn::crop(t, 0, 1, h, wd - 1),
                     nn::crop(t, 0, 0, h, wd - 1));
  auto dyp = nn::sub(nn::crop(pred, 1, 0, h - 1, wd),
                     nn::crop(pred, 0, 0, h - 1, wd));
  auto dyt = nn::sub(nn::crop(t, 1, 0, h - 1, wd),
                     nn::crop(t, 0, 0, h - 1, wd));
  auto mdx = nn::mul(nn::crop(m, 0, 1, h, wd - 1), nn::crop(m, 0, 0, h, wd - 1));
  auto mdy = nn::mul(nn::crop(m, 1, 0, h - 1, wd), nn::crop(m, 0, 0, h - 1, wd));
  const float ndx = std::max(1.0f, mask_count(mdx->value));
  const float ndy = std::max(1.0f, mask_count(mdy->value));
  auto l_grad = nn::add(masked_mean(nn::abs_op(nn::sub(dxp, dxt)), mdx, ndx),
                        masked_mean(nn::abs_op(nn::sub(dyp, dyt)), mdy, ndy));

  // surface normals (-dx, -dy, 1) on the common (h-1, w-1) region
  auto gxp = nn::crop(dxp, 0, 0, h - 1, wd - 1);
  auto gxt = nn::crop(dxt, 0, 0, h - 1, wd - 1);
  auto gyp = nn::crop(dyp, 0, 0, h - 1, wd - 1);
  auto gyt = nn::crop(dyt, 0, 0, h - 1, wd - 1);
  auto dot = nn::add_scalar(
      nn::add(nn::mul(gxp, gxt), nn::mul(gyp, gyt)), 1.0f);
  auto np = nn::sqrt_op(nn::add_scalar(
      nn::add(nn::square(gxp), nn::square(gyp)), 1.0f));
  auto nt = nn::sqrt_op(nn::add_scalar(
      nn::add(nn::square(gxt), nn::square(gyt)), 1.0f));
  auto cos_sim = nn::div(dot, nn::mul(np, nt));
  auto mnorm = nn::mul(nn::crop(mdx, 0, 0, h - 1, wd - 1),
                       nn::crop(mdy, 0, 0, h - 1, wd - 1));
  const float nn_count = std::max(1.0f, mask_count(mnorm->value));
  auto l_norm = masked_mean(
      nn::mul_scalar(nn::add_scalar(cos_sim, -1.0f), -1.0f), mnorm, nn_count);

  // SSIM on the target with invalid pixels filled from the prediction,
  // so they contribute no structural difference
  auto inv_m = nn::mul_scalar(nn::add_scalar(m, -1.0f), -1.0f);
  auto t_filled = nn::add(nn::mul(t, m), nn::mul(pred, inv_m));
  auto l_ssim = nn::mul_scalar(
      nn::add_scalar(
          nn::mul_scalar(nn::ssim(pred, t_filled, ssim_window, value_range),
                         -1.0f),
          1.0f),
      0.5f);

  auto total = nn::mul_scalar(l_depth, w.depth);
  total = nn::add(total, nn::mul_scalar(l_grad, w.grad));
  total = nn::add(total, nn::mul_scalar(l_norm, w.normal));
  total = nn::add(total, nn::mul_scalar(l_ssim, w.ssim));
  return total;
}

namespace {

struct StackedBatch {
  Var<float> prior, voxel;
  Tensor<float> target, mask;
};

StackedBatch stack_batch(const std::vector<ExtrapSample>& samples,
                         const std::vector<std::size_t>& idx, std::size_t lo,
                         std::size_t hi) {
  const auto& first = samples[idx[lo]];
  const int n = int(hi - lo);
  Tensor<float> prior(n, 1, first.prior.h(), first.prior.w());
  Tensor<float> voxel(n, first.voxel.c(), first.voxel.h(), first.voxel.w());
  Tensor<float> target(n, 1, first.target.h(), first.target.w());
  Tensor<float> mask(n, 1, first.mask.h(), first.mask.w());
  for (std::size_t i = lo; i < hi; ++i) {
    const auto& s = samples[idx[i]];
    const std::size_t k = i - lo;
    std::copy(s.prior.data(), s.prior.data() + s.prior.size(),
              prior.data() + k * s.prior.size());
    std::copy(s.voxel.data(), s.voxel.data() + s.voxel.size(),
              voxel.data() + k * s.voxel.size());
    std::copy(s.target.data(), s.target.data() + s.target.size(),
              target.data() + k * s.target.size());
    std::copy(s.mask.data(), s.mask.data() + s.mask.size(),
              mask.data() + k * s.mask.size());
  }
  return {nn::constant(std::move(prior)), nn::constant(std::move(voxel)),
          std::move(target), std::move(mask)};
}

double masked_rmse(const Tensor<float>& pred, const Tensor<float>& target,
                   const Tensor<float>& mask) {
  double se = 0.0, n = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (mask[i] > 0) {
      const double e = double(pred[i]) - double(target[i]);
      se += e * e;
      n += 1.0;
    }
  }
  return n > 0 ? std::sqrt(se / n) : 0.0;
}

}  // namespace

std::vector<TrainEpochLog> train_extrapolator(
    Extrapolator& model, const std::vector<ExtrapSample>& train,
    const std::vector<ExtrapSample>& val, const ExtrapTrainConfig& cfg) {
  if (train.empty()) throw DataError("empty extrapolator training set");
  auto params = model.params();
  nn::Nadam<float> opt(params, cfg.lr0);
  Rng rng(cfg.seed);

  std::vector<std::size_t> order(train.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::vector<TrainEpochLog> log;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const float lr = nn::cosine_anneal_lr(cfg.lr0, epoch, cfg.epochs);
    opt.set_lr(lr);
    rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t lo = 0; lo < order.size(); lo += cfg.batch_size) {
      const std::size_t hi =
          std::min(order.size(), lo + std::size_t(cfg.batch_size));
      auto batch = stack_batch(train, order, lo, hi);
      auto pred = model.forward(batch.prior, batch.voxel);
      auto loss = total_loss(pred, batch.target, batch.mask, cfg.weights);
      opt.zero_grad();
      nn::backward(loss);
      opt.step();
      loss_sum += loss->value[0];
      ++batches;
    }

    TrainEpochLog entry;
    entry.epoch = epoch;
    entry.lr = lr;
    entry.train_loss = loss_sum / double(batches);
    if (!val.empty()) {
      double se = 0.0;
      for (const auto& s : val) {
        auto pred = model.forward(nn::constant(s.prior), nn::constant(s.voxel));
        const double r = masked_rmse(pred->value, s.target, s.mask);
        se += r * r;
      }
      entry.val_metric = std::sqrt(se / double(val.size()));
    }
    log.push_back(entry);
  }
  return log;
}

}  // namespace evd
