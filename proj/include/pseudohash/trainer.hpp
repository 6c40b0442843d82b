#ifndef PSEUDOHASH_TRAINER_HPP
#define PSEUDOHASH_TRAINER_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "pseudohash/dataset.hpp"
#include "pseudohash/hashnet.hpp"
#include "pseudohash/labelspace.hpp"
#include "pseudohash/objective.hpp"
#include "pseudohash/retrieval.hpp"

namespace pseudohash {

enum class LrSchedule { every_third_of_epochs, every_k_iters };

/// dense: one n x n similarity table up front. on_demand: s and the indicator
/// are recomputed per batch pair from the labels.
enum class SimilarityMode { dense, on_demand };

LrSchedule parse_lr_schedule(const std::string& name);
std::string to_string(LrSchedule schedule);
SimilarityMode parse_similarity_mode(const std::string& name);
std::string to_string(SimilarityMode mode);

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 128;
  double lr = 0.01;
  LrSchedule lr_schedule = LrSchedule::every_third_of_epochs;
  std::size_t lr_step_iters = 50;
  double alpha = 2.0;
  double beta = 100.0;
  std::int64_t seed = 0;
  std::size_t k = 16;
  std::vector<Eigen::Index> hidden_dims = {128, 128};
  /// The batch gradient is divided by step_divisor * batch * k before the lr step.
  double step_divisor = 4.0;
  SimilarityMode similarity = SimilarityMode::dense;
  /// Evaluate the full objective over all training pairs before and after training.
  bool track_objective = true;

  LossConfig loss() const { return {alpha, beta}; }
  /// Throws std::invalid_argument naming the offending field.
  void validate(std::size_t n) const;
};

/// Step size for the given 0-based epoch and global iteration counters.
double lr_at(const TrainConfig& cfg, std::size_t epoch, std::size_t iteration);

/// Seeded per-epoch shuffles of 0..n-1 cut into consecutive batches. The last
/// batch of an epoch is short when batch_size does not divide n.
class BatchSampler {
 public:
  BatchSampler(std::size_t n, std::size_t batch_size, std::uint64_t seed);

  std::vector<std::size_t> next();
  std::size_t batches_per_epoch() const { return (n_ + batch_size_ - 1) / batch_size_; }

 private:
  std::size_t n_;
  std::size_t batch_size_;
  std::mt19937_64 rng_;
  std::vector<std::size_t> order_;
  std::size_t cursor_;
};

/// All unordered pairs of distinct batch rows with their similarity terms.
PairBatch batch_pairs(const std::vector<std::size_t>& items, const LabelMatrix& labels,
                      const SimilarityMatrix* dense = nullptr);

struct IterationRecord {
  std::size_t epoch = 0;
  std::size_t iteration = 0;
  double lr = 0.0;
  double pair_loss = 0.0;
  double quant_loss = 0.0;
  double total = 0.0;
};

struct TrainResult {
  HashModel<double> model;
  CodeStore codes;
  std::vector<IterationRecord> log;
  LossBreakdown<double> initial_objective;
  LossBreakdown<double> final_objective;
};

/// dL/du used for one SGD step. The within-batch pair gradient is scaled by
/// (n - 1) / (batch - 1) so that each row sees an unbiased estimate of its sum
/// over all n - 1 partners; the quantization gradient is kept as is. The result
/// is divided by step_divisor * batch * k.
Matrix<double> step_gradient(const Matrix<double>& u, const Matrix<double>& codes, const PairBatch& pairs,
                             const LossConfig& cfg, std::size_t n, double step_divisor);

/// Full objective over every unordered pair of items, codes taken as sgn(u).
LossBreakdown<double> full_objective(const HashModel<double>& model, const FeatureMatrix& features,
                                     const LabelMatrix& labels, const LossConfig& cfg);

/// Mini-batch training with alternating code updates. `features` and `labels`
/// must cover the same ids; labels are aligned to the feature row order.
TrainResult train(const FeatureMatrix& features, const LabelMatrix& labels, const TrainConfig& cfg,
                  const std::function<void(const IterationRecord&)>& on_iteration = {});

/// One JSON object per line.
void write_training_log(std::ostream& out, const std::vector<IterationRecord>& log);

}  // namespace pseudohash

#endif  // PSEUDOHASH_TRAINER_HPP
