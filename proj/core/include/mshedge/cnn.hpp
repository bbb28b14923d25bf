#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mshedge/dataset.hpp"
#include "mshedge/prob_vector.hpp"

namespace mshedge {

/// 1-D convolutional classifier over the two feature channels:
///
///   conv(2->4, k5) relu, maxpool 2     30 -> 15
///   conv(4->8, k5) relu, maxpool 2     15 -> 7
///   conv(8->8, k3) relu, flatten       7 -> 56
///   dense 56->24 relu, 24->16 relu, 16->8, softmax
///
/// Convolutions are zero-padded to keep the length ("same"). All weights
/// live in one flat vector; the layout is fixed by CnnLayout.
struct CnnLayout {
  struct Conv {
    std::size_t in_ch, out_ch, kernel, length;
    std::size_t weight_offset, bias_offset;
  };
  struct Dense {
    std::size_t in, out;
    std::size_t weight_offset, bias_offset;
  };
  Conv conv[3];
  Dense dense[3];
  std::size_t param_count;
};

const CnnLayout& cnn_layout();

struct CnnModel {
  std::vector<double> params;

  /// All weights and biases zero (outputs the uniform distribution).
  static CnnModel zeros();
  /// He-uniform weights, zero biases; a pure function of seed.
  static CnnModel initialized(std::uint64_t seed);
  static std::size_t param_count() { return cnn_layout().param_count; }
};

/// Softmax output for one input. Throws InputError if params has the
/// wrong size.
ProbVector cnn_forward(const CnnModel& model, const FeatureTensor& x);

/// Mean cross-entropy over the batch; adds d(loss)/d(params) into `grad`
/// (which must have param_count() entries and is overwritten).
double cnn_loss_and_gradient(const CnnModel& model, std::span<const Sample> batch, std::span<double> grad);
double cnn_loss(const CnnModel& model, std::span<const Sample> batch);

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  std::size_t epochs = 100;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t init_seed = 1;
  std::size_t ensemble_size = 3;

  void validate() const;
};

struct TrainReport {
  std::vector<double> loss_curve;  // mean training loss per epoch
  std::uint64_t seed = 0;
};

struct TrainedCnn {
  CnnModel model;
  TrainReport report;
};

/// Mini-batch Adam on cross-entropy. Batches are drawn from a per-epoch
/// shuffle seeded by cfg.init_seed, so the run is reproducible. Throws
/// NumericalError if the loss stops being finite.
TrainedCnn cnn_train(std::span<const Sample> train, const TrainConfig& cfg);

/// cfg.ensemble_size members with seeds derived from cfg.init_seed; members
/// train concurrently but each is single-threaded.
std::vector<TrainedCnn> cnn_train_ensemble(std::span<const Sample> train, const TrainConfig& cfg,
                                           std::size_t threads = 0);

}  // namespace mshedge
