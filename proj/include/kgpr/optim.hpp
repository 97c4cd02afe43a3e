#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kgpr/error.hpp"

namespace kgpr {

struct AdamWConfig {
  double lr = 1e-2;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.01;
  // Only rows that received a nonzero gradient are decayed and updated.
  bool sparse = true;

  void validate() const {
    if (!(lr > 0.0) || !std::isfinite(lr)) throw Error(ErrorKind::Config, "lr must be positive");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
      throw Error(ErrorKind::Config, "betas must lie in [0, 1)");
    }
    if (!(epsilon > 0.0)) throw Error(ErrorKind::Config, "epsilon must be positive");
    if (!(weight_decay >= 0.0)) throw Error(ErrorKind::Config, "weight_decay must be >= 0");
  }
};

/// AdamW with decoupled weight decay and bias-corrected moments. Parameters
/// live outside the optimizer; each registered block owns the moment buffers
/// of one parameter array. One begin_step() precedes the updates of a step.
class AdamW {
 public:
  explicit AdamW(AdamWConfig cfg = {}) : cfg_(cfg) { cfg_.validate(); }

  const AdamWConfig& config() const noexcept { return cfg_; }
  std::uint64_t step() const noexcept { return step_; }

  std::size_t add_block(std::size_t size) {
    blocks_.push_back({std::vector<double>(size, 0.0), std::vector<double>(size, 0.0)});
    return blocks_.size() - 1;
  }

  void begin_step() noexcept {
    ++step_;
    bias1_ = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
    bias2_ = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
  }

  /// Updates params[i] for moment slots offset + i.
  void update(std::size_t block, std::size_t offset, std::span<double> params,
              std::span<const double> grads) {
    if (step_ == 0) throw Error(ErrorKind::Config, "AdamW::update called before begin_step");
    if (params.size() != grads.size()) {
      throw Error(ErrorKind::Mismatch, "parameter/gradient shape mismatch (" +
                                           std::to_string(params.size()) + " vs " +
                                           std::to_string(grads.size()) + ")");
    }
    auto& b = blocks_.at(block);
    if (offset + params.size() > b.m.size()) {
      throw Error(ErrorKind::Mismatch, "update exceeds optimizer block size");
    }
    const double decay = 1.0 - cfg_.lr * cfg_.weight_decay;
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double g = grads[i];
      double& m = b.m[offset + i];
      double& v = b.v[offset + i];
      m = cfg_.beta1 * m + (1.0 - cfg_.beta1) * g;
      v = cfg_.beta2 * v + (1.0 - cfg_.beta2) * g * g;
      const double m_hat = m / bias1_;
      const double v_hat = v / bias2_;
      params[i] = params[i] * decay - cfg_.lr * m_hat / (std::sqrt(v_hat) + cfg_.epsilon);
    }
  }

 private:
  struct Block {
    std::vector<double> m;
    std::vector<double> v;
  };

  AdamWConfig cfg_;
  std::vector<Block> blocks_;
  std::uint64_t step_ = 0;
  double bias1_ = 1.0;
  double bias2_ = 1.0;
};

}  // namespace kgpr
