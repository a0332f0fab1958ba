#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sslzsl/dataset.hpp"
#include "sslzsl/error.hpp"
#include "sslzsl/io.hpp"
#include "sslzsl/model.hpp"
#include "sslzsl/rng.hpp"

namespace sslzsl {

/// First-order update rules. Moment buffers live in the instance, so a fresh
/// Optimizer per training run starts from zero state.
class Optimizer {
 public:
  static constexpr double kMomentum = 0.9;
  static constexpr double kAdamBeta1 = 0.9;
  static constexpr double kAdamBeta2 = 0.999;
  static constexpr double kAdamEps = 1e-8;

  Optimizer(OptimizerKind kind, double lr, std::size_t param_count)
      : kind_(kind), lr_(lr), first_(param_count, 0.0), second_(param_count, 0.0) {}

  struct Block {
    std::span<double> param;
    std::span<const double> grad;
  };

  /// One update over all parameter blocks, in order.
  void step(std::initializer_list<Block> blocks) {
    ++t_;
    const double bias1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(t_));
    const double bias2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(t_));
    std::size_t k = 0;
    for (const auto& blk : blocks) {
      for (std::size_t i = 0; i < blk.param.size(); ++i, ++k) {
        const double g = blk.grad[i];
        switch (kind_) {
          case OptimizerKind::sgd:
            blk.param[i] -= lr_ * g;
            break;
          case OptimizerKind::momentum:
            first_[k] = kMomentum * first_[k] + g;
            blk.param[i] -= lr_ * first_[k];
            break;
          case OptimizerKind::adam: {
            first_[k] = kAdamBeta1 * first_[k] + (1.0 - kAdamBeta1) * g;
            second_[k] = kAdamBeta2 * second_[k] + (1.0 - kAdamBeta2) * g * g;
            const double m_hat = first_[k] / bias1;
            const double v_hat = second_[k] / bias2;
            blk.param[i] -= lr_ * m_hat / (std::sqrt(v_hat) + kAdamEps);
            break;
          }
        }
      }
    }
  }

  std::size_t steps() const { return t_; }

 private:
  OptimizerKind kind_;
  double lr_;
  std::vector<double> first_;
  std::vector<double> second_;
  std::size_t t_ = 0;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  LossTerms loss;         // full training set, end of epoch
  double seconds = 0.0;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
};

struct TrainResult {
  ModelParams params;
  TrainHistory history;
};

using EpochCallback = std::function<void(std::size_t epoch, const ModelParams&)>;

/// Shuffled minibatch training of {V, b} on the seen-class split.
///
/// Epoch e visits a permutation derived from (h.seed, e); the last partial
/// batch is kept. Each history record holds the loss over the whole training
/// set after that epoch.
inline TrainResult train(const ZslDataset& data, const Hyperparams& h,
                         const EpochCallback& on_epoch = {}) {
  h.validate();
  require_valid(data);

  const Matrix& features = data.train_features;
  const Matrix& descriptors = data.seen_descriptors;
  const std::size_t m = features.rows();

  TrainResult out;
  out.params = init_params(data.descriptor_dim(), data.feature_dim(), data.seen_classes(), h.seed);
  ModelParams& p = out.params;
  Optimizer opt(h.optimizer, h.lr, p.V.size() + p.b.size());

  auto describe = [](const LossTerms& t) {
    return "ce=" + format_double(t.ce) + " reg=" + format_double(t.reg) +
           " penalty=" + format_double(t.penalty);
  };
  auto finite = [](const LossTerms& t) {
    return std::isfinite(t.ce) && std::isfinite(t.reg) && std::isfinite(t.penalty);
  };

  Matrix batch_x;
  Labels batch_y;
  for (std::size_t epoch = 0; epoch < h.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    const auto order = epoch_permutation(m, h.seed, epoch);
    std::size_t batch_index = 0;
    for (std::size_t lo = 0; lo < m; lo += h.batch_size, ++batch_index) {
      const std::size_t hi = std::min(m, lo + h.batch_size);
      batch_x = Matrix(hi - lo, features.cols());
      batch_y.resize(hi - lo);
      for (std::size_t k = lo; k < hi; ++k) {
        auto src = features.row(order[k]);
        std::copy(src.begin(), src.end(), batch_x.row(k - lo).begin());
        batch_y[k - lo] = data.train_labels[order[k]];
      }
      const auto eval = ssl_evaluate(p, batch_x, batch_y, descriptors, h);
      if (!finite(eval.loss)) {
        throw NonFiniteLossError("non-finite loss at epoch " + std::to_string(epoch + 1) +
                                 ", batch " + std::to_string(batch_index) + ": " +
                                 describe(eval.loss));
      }
      if (h.lr > 0.0) {
        opt.step({{p.V.values(), eval.grad.dV.values()}, {p.b, eval.grad.db}});
      }
    }
    EpochRecord rec;
    rec.epoch = epoch + 1;
    rec.loss = ssl_loss_terms(p, features, data.train_labels, descriptors, h);
    rec.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (!finite(rec.loss)) {
      throw NonFiniteLossError("non-finite loss after epoch " + std::to_string(epoch + 1) + ": " +
                               describe(rec.loss));
    }
    out.history.epochs.push_back(rec);
    if (on_epoch) on_epoch(epoch + 1, p);
  }
  return out;
}

/// Header: epoch,total,ce,reg,penalty,seconds
inline std::string history_csv(const TrainHistory& hist) {
  std::string out = "epoch,total,ce,reg,penalty,seconds\n";
  for (const auto& r : hist.epochs) {
    out += std::to_string(r.epoch) + "," + format_double(r.loss.total()) + "," +
           format_double(r.loss.ce) + "," + format_double(r.loss.reg) + "," +
           format_double(r.loss.penalty) + "," + format_double(r.seconds) + "\n";
  }
  return out;
}

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_entry;  // "V[i,j]" or "b[j]"
  double analytic = 0.0;
  double numeric = 0.0;
};

/// Compares ssl_grad against central differences of ssl_loss for every entry
/// of V and b. Relative error per entry is
/// |g_analytic - g_fd| / max(|g_analytic|, |g_fd|, 1e-8).
inline GradCheckResult grad_check_detailed(const ModelParams& params, const Matrix& features,
                                           std::span<const std::size_t> labels,
                                           const Matrix& descriptors, const Hyperparams& h,
                                           double step = 1e-6) {
  if (!(step > 0.0 && step <= 1e-3)) throw DataError("grad_check: step must lie in (0, 1e-3]");
  const Gradient g = ssl_grad(params, features, labels, descriptors, h);
  ModelParams probe = params;
  GradCheckResult res;

  auto check = [&](double& slot, double analytic, const std::string& name) {
    const double saved = slot;
    slot = saved + step;
    const double up = ssl_loss(probe, features, labels, descriptors, h);
    slot = saved - step;
    const double down = ssl_loss(probe, features, labels, descriptors, h);
    slot = saved;
    const double numeric = (up - down) / (2.0 * step);
    const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
    const double rel = std::abs(analytic - numeric) / denom;
    if (rel > res.max_rel_error || res.worst_entry.empty()) {
      res = {rel, name, analytic, numeric};
    }
  };

  for (std::size_t i = 0; i < probe.V.rows(); ++i) {
    for (std::size_t j = 0; j < probe.V.cols(); ++j) {
      check(probe.V(i, j), g.dV(i, j),
            "V[" + std::to_string(i) + "," + std::to_string(j) + "]");
    }
  }
  for (std::size_t j = 0; j < probe.b.size(); ++j) {
    check(probe.b[j], g.db[j], "b[" + std::to_string(j) + "]");
  }
  return res;
}

inline double grad_check(const ModelParams& params, const Matrix& features,
                         std::span<const std::size_t> labels, const Matrix& descriptors,
                         const Hyperparams& h, double step = 1e-6) {
  return grad_check_detailed(params, features, labels, descriptors, h, step).max_rel_error;
}

}  // namespace sslzsl
