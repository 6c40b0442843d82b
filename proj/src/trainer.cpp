#include "pseudohash/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

namespace pseudohash {

LrSchedule parse_lr_schedule(const std::string& name) {
  if (name == "every_third_of_epochs") return LrSchedule::every_third_of_epochs;
  if (name == "every_k_iters") return LrSchedule::every_k_iters;
  throw std::invalid_argument("lr_schedule: unknown schedule '" + name + "'");
}

std::string to_string(LrSchedule schedule) {
  return schedule == LrSchedule::every_third_of_epochs ? "every_third_of_epochs" : "every_k_iters";
}

SimilarityMode parse_similarity_mode(const std::string& name) {
  if (name == "dense") return SimilarityMode::dense;
  if (name == "on_demand") return SimilarityMode::on_demand;
  throw std::invalid_argument("similarity: unknown mode '" + name + "'");
}

std::string to_string(SimilarityMode mode) { return mode == SimilarityMode::dense ? "dense" : "on_demand"; }

void TrainConfig::validate(std::size_t n) const {
  if (batch_size < 1) throw std::invalid_argument("batch_size: must be positive");
  if (batch_size > n) {
    throw std::invalid_argument("batch_size: " + std::to_string(batch_size) + " exceeds the " + std::to_string(n) +
                                " training items");
  }
  if (!(lr > 0.0) || !std::isfinite(lr)) throw std::invalid_argument("lr: must be positive");
  if (lr_step_iters < 1) throw std::invalid_argument("lr_step_iters: must be positive");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha: must be nonnegative");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw std::invalid_argument("beta: must be nonnegative");
  if (k < 1) throw std::invalid_argument("k: must be positive");
  if (!(step_divisor > 0.0) || !std::isfinite(step_divisor)) throw std::invalid_argument("step_divisor: must be positive");
  for (auto h : hidden_dims) {
    if (h < 1) throw std::invalid_argument("hidden_dims: widths must be positive");
  }
}

double lr_at(const TrainConfig& cfg, std::size_t epoch, std::size_t iteration) {
  std::size_t decades = 0;
  if (cfg.lr_schedule == LrSchedule::every_third_of_epochs) {
    decades = cfg.epochs == 0 ? 0 : (3 * epoch) / cfg.epochs;
  } else {
    decades = iteration / cfg.lr_step_iters;
  }
  return cfg.lr * std::pow(10.0, -static_cast<double>(decades));
}

BatchSampler::BatchSampler(std::size_t n, std::size_t batch_size, std::uint64_t seed)
    : n_(n), batch_size_(batch_size), rng_(seed), order_(n), cursor_(n) {
  if (batch_size < 1 || batch_size > n) throw std::invalid_argument("batch sampler: need 1 <= batch_size <= n");
  std::iota(order_.begin(), order_.end(), std::size_t{0});
}

std::vector<std::size_t> BatchSampler::next() {
  if (cursor_ >= n_) {
    std::shuffle(order_.begin(), order_.end(), rng_);
    cursor_ = 0;
  }
  const std::size_t end = std::min(n_, cursor_ + batch_size_);
  std::vector<std::size_t> batch(order_.begin() + static_cast<std::ptrdiff_t>(cursor_),
                                 order_.begin() + static_cast<std::ptrdiff_t>(end));
  cursor_ = end;
  return batch;
}

PairBatch batch_pairs(const std::vector<std::size_t>& items, const LabelMatrix& labels,
                      const SimilarityMatrix* dense) {
  PairBatch pairs;
  pairs.reserve(items.size() * (items.size() - (items.empty() ? 0 : 1)) / 2);
  for (std::size_t a = 0; a < items.size(); ++a) {
    for (std::size_t b = a + 1; b < items.size(); ++b) {
      PairTerm p;
      p.i = static_cast<Eigen::Index>(a);
      p.j = static_cast<Eigen::Index>(b);
      if (dense != nullptr) {
        const auto ia = static_cast<Eigen::Index>(items[a]);
        const auto ib = static_cast<Eigen::Index>(items[b]);
        p.s = dense->s(ia, ib);
        p.indicator = dense->indicator(ia, ib);
      } else {
        p.s = similarity(labels.row(items[a]), labels.row(items[b]));
        p.indicator = indicator(labels.row(items[a]), labels.row(items[b]));
      }
      pairs.push_back(p);
    }
  }
  return pairs;
}

Matrix<double> step_gradient(const Matrix<double>& u, const Matrix<double>& codes, const PairBatch& pairs,
                             const LossConfig& cfg, std::size_t n, double step_divisor) {
  const auto batch = static_cast<double>(u.rows());
  const Matrix<double> quant = 2.0 * cfg.beta * (u - codes);
  Matrix<double> g = grad_u(u, codes, pairs, cfg) - quant;
  if (u.rows() > 1) g *= static_cast<double>(n - 1) / (batch - 1.0);
  g += quant;
  return g / (step_divisor * batch * static_cast<double>(u.cols()));
}

LossBreakdown<double> full_objective(const HashModel<double>& model, const FeatureMatrix& features,
                                     const LabelMatrix& labels, const LossConfig& cfg) {
  std::vector<std::size_t> all(features.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  const Matrix<double> u = forward(model, features.values()).u;
  const Matrix<double> codes = sign_codes(u);
  return total_loss(u, codes, batch_pairs(all, labels), cfg);
}

TrainResult train(const FeatureMatrix& features, const LabelMatrix& all_labels, const TrainConfig& cfg,
                  const std::function<void(const IterationRecord&)>& on_iteration) {
  const std::size_t n = features.size();
  if (n < 2) throw std::invalid_argument("train: need at least two items");
  for (const auto& id : features.ids()) {
    if (!all_labels.contains(id)) throw InputError("train: item '" + id + "' has features but no labels");
  }
  cfg.validate(n);
  const LabelMatrix labels = all_labels.select(features.ids());
  const LossConfig loss_cfg = cfg.loss();

  SimilarityMatrix dense;
  if (cfg.similarity == SimilarityMode::dense) dense = build_similarity(labels);
  const SimilarityMatrix* table = cfg.similarity == SimilarityMode::dense ? &dense : nullptr;

  TrainResult result;
  result.model = init_model<double>(features.dim(), cfg.hidden_dims, static_cast<Eigen::Index>(cfg.k), cfg.seed);
  Matrix<double> codes = encode_batch(result.model, features.values());
  if (cfg.track_objective) result.initial_objective = full_objective(result.model, features, labels, loss_cfg);

  // Separate streams for initialization and batch order.
  BatchSampler sampler(n, cfg.batch_size, static_cast<std::uint64_t>(cfg.seed) ^ 0x9E3779B97F4A7C15ULL);

  std::size_t iteration = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t b = 0; b < sampler.batches_per_epoch(); ++b, ++iteration) {
      const auto items = sampler.next();
      Matrix<double> batch_x(static_cast<Eigen::Index>(items.size()), features.dim());
      for (std::size_t r = 0; r < items.size(); ++r) {
        batch_x.row(static_cast<Eigen::Index>(r)) = features.values().row(static_cast<Eigen::Index>(items[r]));
      }
      const auto trace = forward(result.model, batch_x);
      const Matrix<double> batch_codes = sign_codes(trace.u);
      for (std::size_t r = 0; r < items.size(); ++r) {
        codes.row(static_cast<Eigen::Index>(items[r])) = batch_codes.row(static_cast<Eigen::Index>(r));
      }

      const PairBatch pairs = batch_pairs(items, labels, table);
      const auto losses = total_loss(trace.u, batch_codes, pairs, loss_cfg);
      const Matrix<double> du = step_gradient(trace.u, batch_codes, pairs, loss_cfg, n, cfg.step_divisor);
      const auto grad = backward(result.model, trace, du);

      IterationRecord rec{epoch, iteration, lr_at(cfg, epoch, iteration), losses.pair, losses.quant, losses.total};
      apply_gradient_step(result.model, grad, rec.lr);
      result.log.push_back(rec);
      if (on_iteration) on_iteration(rec);
    }
  }

  result.model.validate();
  codes = encode_batch(result.model, features.values());
  result.codes = CodeStore::from_codes(features.ids(), codes);
  if (cfg.track_objective) result.final_objective = full_objective(result.model, features, labels, loss_cfg);
  return result;
}

void write_training_log(std::ostream& out, const std::vector<IterationRecord>& log) {
  for (const auto& rec : log) {
    nlohmann::ordered_json j;
    j["epoch"] = rec.epoch;
    j["iteration"] = rec.iteration;
    j["lr"] = rec.lr;
    j["pair_loss"] = rec.pair_loss;
    j["quant_loss"] = rec.quant_loss;
    j["total"] = rec.total;
    out << j.dump() << '\n';
  }
}

}  // namespace pseudohash
