#ifndef PSEUDOHASH_COMMANDS_HPP
#define PSEUDOHASH_COMMANDS_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pseudohash/metrics.hpp"
#include "pseudohash/synthetic.hpp"
#include "pseudohash/trainer.hpp"

namespace pseudohash::commands {

using std::filesystem::path;

struct IngestOptions {
  path detections;
  path class_map;
  path out;
  double threshold = 0.5;
};

struct TrainOptions {
  path features;
  path labels;
  path checkpoint;
  path codes;
  path query_codes;  // written when test_size > 0 and non-empty
  path log;
  TrainConfig train;
  std::size_t test_size = 0;
  std::uint64_t split_seed = 0;
};

struct EncodeOptions {
  path checkpoint;
  path features;
  path out;
};

struct QueryOptions {
  path codes;
  std::string id;
  std::string bits;  // '0'/'1' string of length k, used when id is empty
  std::size_t top_n = 10;
  bool exclude_self = false;
};

struct EvaluateOptions {
  path queries;
  path corpus;
  path labels;
  std::string label_source = "ground_truth";
  std::vector<std::size_t> cutoffs = {100};
  path report;
  path lsh_features;  // when set, an LSH baseline over the same ids is evaluated too
  std::uint64_t lsh_seed = 0;
};

struct SweepOptions {
  TrainOptions base;
  path eval_labels;  // defaults to the training labels
  std::string param;  // "alpha" or "beta"
  std::vector<double> values;
  std::vector<std::size_t> cutoffs = {100};
  path out;
};

struct SynthOptions {
  SyntheticSpec spec;
  path features;
  path labels;
  path detections;
  path class_map;
};

/// Trained model plus codes for the training corpus and the held-out queries.
struct Experiment {
  TrainResult result;
  FeatureMatrix train_features;
  FeatureMatrix test_features;
  CodeStore query_codes;
};

Experiment run_experiment(const FeatureMatrix& features, const LabelMatrix& labels, const TrainConfig& cfg,
                          std::size_t test_size, std::uint64_t split_seed);

/// Held-out queries against the training corpus; with no held-out split the
/// corpus is queried against itself (each query excluded from its own list).
MetricsReport evaluate_experiment(const Experiment& exp, const LabelMatrix& eval_labels,
                                  const std::vector<std::size_t>& cutoffs, const std::string& label_source);

/// Same split and id sets as `exp`, encoded with random hyperplanes instead.
MetricsReport evaluate_lsh_baseline(const Experiment& exp, const LabelMatrix& eval_labels,
                                    const std::vector<std::size_t>& cutoffs, std::uint64_t seed,
                                    const std::string& label_source);

// Each command writes its human-readable output to `out`, warnings to `err`,
// and throws on failure.
void cmd_ingest(const IngestOptions& opt, std::ostream& out, std::ostream& err);
TrainResult cmd_train(const TrainOptions& opt, std::ostream& out);
void cmd_encode(const EncodeOptions& opt, std::ostream& out);
RankedList cmd_query(const QueryOptions& opt, std::ostream& out, std::ostream& err);
std::vector<MetricsReport> cmd_evaluate(const EvaluateOptions& opt, std::ostream& out);
void cmd_sweep(const SweepOptions& opt, std::ostream& out);
void cmd_synth(const SynthOptions& opt, std::ostream& out);

}  // namespace pseudohash::commands

#endif  // PSEUDOHASH_COMMANDS_HPP
