#include "pseudohash/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "pseudohash/io.hpp"

namespace pseudohash::commands {

namespace {

void require_input(const path& p, const std::string& field) {
  if (p.empty()) throw std::invalid_argument(field + ": path is required");
  if (!std::filesystem::exists(p)) throw std::invalid_argument(field + ": no such file '" + p.string() + "'");
}

void require_output(const path& p, const std::string& field) {
  if (p.empty()) throw std::invalid_argument(field + ": path is required");
}

void check_cutoffs(const std::vector<std::size_t>& cutoffs) {
  if (cutoffs.empty()) throw std::invalid_argument("cutoffs: at least one cutoff is required");
  for (auto c : cutoffs) {
    if (c < 1) throw std::invalid_argument("cutoffs: must be positive");
  }
}

CodeStore encode_store(const HashModel<double>& model, const FeatureMatrix& features) {
  if (features.dim() != model.input_dim()) {
    throw std::invalid_argument("features: dimension " + std::to_string(features.dim()) +
                                " does not match the checkpoint input dimension " +
                                std::to_string(model.input_dim()));
  }
  return CodeStore::from_codes(features.ids(), encode_batch(model, features.values()));
}

std::vector<std::uint64_t> parse_bits(const std::string& bits, std::size_t k) {
  if (bits.size() != k) {
    throw std::invalid_argument("vector: expected " + std::to_string(k) + " bits, got " + std::to_string(bits.size()));
  }
  Eigen::VectorXi code(static_cast<Eigen::Index>(k));
  for (std::size_t j = 0; j < k; ++j) {
    if (bits[j] != '0' && bits[j] != '1') throw std::invalid_argument("vector: bits must be '0' or '1'");
    code(static_cast<Eigen::Index>(j)) = bits[j] == '1' ? 1 : -1;
  }
  return pack_code(code);
}

}  // namespace

Experiment run_experiment(const FeatureMatrix& features, const LabelMatrix& labels, const TrainConfig& cfg,
                          std::size_t test_size, std::uint64_t split_seed) {
  if (test_size >= features.size()) {
    throw std::invalid_argument("test_size: " + std::to_string(test_size) + " leaves no training items out of " +
                                std::to_string(features.size()));
  }
  const Split split = split_indices(features.size(), test_size, split_seed);
  Experiment exp;
  exp.train_features = features.rows(split.train);
  exp.test_features = features.rows(split.test);
  exp.result = train(exp.train_features, labels, cfg);
  exp.query_codes = test_size > 0 ? encode_store(exp.result.model, exp.test_features) : exp.result.codes;
  return exp;
}

MetricsReport evaluate_experiment(const Experiment& exp, const LabelMatrix& eval_labels,
                                  const std::vector<std::size_t>& cutoffs, const std::string& label_source) {
  return evaluate(exp.query_codes, exp.result.codes, eval_labels, cutoffs, label_source);
}

MetricsReport evaluate_lsh_baseline(const Experiment& exp, const LabelMatrix& eval_labels,
                                    const std::vector<std::size_t>& cutoffs, std::uint64_t seed,
                                    const std::string& label_source) {
  const LshEncoder lsh(exp.train_features.dim(), exp.result.codes.code_length(), seed);
  const CodeStore corpus = lsh.encode(exp.train_features);
  const CodeStore queries = exp.test_features.size() > 0 ? lsh.encode(exp.test_features) : corpus;
  return evaluate(queries, corpus, eval_labels, cutoffs, label_source);
}

void cmd_ingest(const IngestOptions& opt, std::ostream& out, std::ostream& err) {
  require_input(opt.detections, "detections");
  require_input(opt.class_map, "class_map");
  require_output(opt.out, "out");
  const auto classes = read_class_map(opt.class_map);
  const LabelMatrix labels = ingest_detections(opt.detections, opt.threshold, classes);
  write_atomically(opt.out, [&](std::ostream& os) { write_labels(os, labels); });
  const auto unlabeled = labels.unlabeled_items();
  if (!unlabeled.empty()) {
    err << "warning: " << unlabeled.size() << " item(s) have no label above threshold " << opt.threshold << '\n';
  }
  out << "items=" << labels.size() << " classes=" << labels.num_classes() << " unlabeled=" << unlabeled.size()
      << '\n';
}

TrainResult cmd_train(const TrainOptions& opt, std::ostream& out) {
  require_input(opt.features, "features");
  require_input(opt.labels, "labels");
  require_output(opt.checkpoint, "checkpoint");
  require_output(opt.codes, "codes");
  const FeatureMatrix features = load_features(opt.features);
  const LabelMatrix labels = read_labels(opt.labels);
  Experiment exp = run_experiment(features, labels, opt.train, opt.test_size, opt.split_seed);

  save_checkpoint(opt.checkpoint, exp.result.model);
  save_codes(opt.codes, exp.result.codes);
  if (!opt.query_codes.empty()) save_codes(opt.query_codes, exp.query_codes);
  if (!opt.log.empty()) {
    write_atomically(opt.log, [&](std::ostream& os) { write_training_log(os, exp.result.log); });
  }

  const auto& r = exp.result;
  out << std::setprecision(10) << "trained " << exp.train_features.size() << " items, k=" << opt.train.k
      << ", iterations=" << r.log.size() << '\n';
  if (opt.train.track_objective) {
    out << "objective: initial=" << r.initial_objective.total << " final=" << r.final_objective.total << '\n';
  }
  return std::move(exp.result);
}

void cmd_encode(const EncodeOptions& opt, std::ostream& out) {
  require_input(opt.checkpoint, "checkpoint");
  require_input(opt.features, "features");
  require_output(opt.out, "out");
  const auto model = load_checkpoint(opt.checkpoint);
  const CodeStore codes = encode_store(model, load_features(opt.features));
  save_codes(opt.out, codes);
  out << "encoded " << codes.size() << " items, k=" << codes.code_length() << '\n';
}

RankedList cmd_query(const QueryOptions& opt, std::ostream& out, std::ostream& err) {
  require_input(opt.codes, "codes");
  if (opt.top_n < 1) throw std::invalid_argument("top_n: must be positive");
  if (opt.id.empty() == opt.bits.empty()) throw std::invalid_argument("query: give exactly one of id or vector");
  const CodeStore store = load_codes(opt.codes);

  std::vector<std::uint64_t> query;
  std::optional<std::string> exclude;
  std::string label;
  if (!opt.id.empty()) {
    if (!store.contains(opt.id)) throw InputError("id: unknown item '" + opt.id + "'");
    const auto row = store.row(store.index_of(opt.id));
    query.assign(row.begin(), row.end());
    if (opt.exclude_self) exclude = opt.id;
    label = opt.id;
  } else {
    query = parse_bits(opt.bits, store.code_length());
    label = opt.bits;
  }

  const std::size_t available = store.size() - (exclude ? 1 : 0);
  if (opt.top_n > available) {
    err << "warning: top_n " << opt.top_n << " exceeds the " << available << " searchable items; truncating\n";
  }
  RankedList ranked = search(store, query, opt.top_n, exclude);
  ranked.query_id = label;
  for (std::size_t r = 0; r < ranked.entries.size(); ++r) {
    out << r + 1 << ' ' << ranked.entries[r].item_id << ' ' << ranked.entries[r].distance << '\n';
  }
  return ranked;
}

std::vector<MetricsReport> cmd_evaluate(const EvaluateOptions& opt, std::ostream& out) {
  require_input(opt.queries, "queries");
  require_input(opt.corpus, "corpus");
  require_input(opt.labels, "labels");
  check_cutoffs(opt.cutoffs);
  const CodeStore queries = load_codes(opt.queries);
  const CodeStore corpus = load_codes(opt.corpus);
  const LabelMatrix labels = read_labels(opt.labels);
  for (const auto* store : {&queries, &corpus}) {
    for (const auto& id : store->ids()) {
      if (!labels.contains(id)) throw InputError("labels: no labels for item '" + id + "'");
    }
  }

  std::vector<MetricsReport> reports;
  std::vector<std::string> methods;
  reports.push_back(evaluate(queries, corpus, labels, opt.cutoffs, opt.label_source));
  methods.emplace_back("trained");

  if (!opt.lsh_features.empty()) {
    require_input(opt.lsh_features, "lsh_features");
    const FeatureMatrix features = load_features(opt.lsh_features);
    const LshEncoder lsh(features.dim(), corpus.code_length(), opt.lsh_seed);
    reports.push_back(evaluate(lsh.encode(features.select(queries.ids())), lsh.encode(features.select(corpus.ids())),
                               labels, opt.cutoffs, opt.label_source));
    methods.emplace_back("lsh");
  }

  std::string records;
  for (std::size_t m = 0; m < reports.size(); ++m) {
    out << "[" << methods[m] << "]\n" << format_report(reports[m]);
    records += report_records(reports[m], methods[m]);
  }
  if (!opt.report.empty()) write_atomically(opt.report, [&](std::ostream& os) { os << records; });
  return reports;
}

void cmd_sweep(const SweepOptions& opt, std::ostream& out) {
  require_input(opt.base.features, "features");
  require_input(opt.base.labels, "labels");
  require_output(opt.out, "out");
  check_cutoffs(opt.cutoffs);
  if (opt.param != "alpha" && opt.param != "beta") {
    throw std::invalid_argument("param: must be 'alpha' or 'beta', got '" + opt.param + "'");
  }
  if (opt.values.empty()) throw std::invalid_argument("values: at least one value is required");
  for (double v : opt.values) {
    if (!(v > 0.0)) throw std::invalid_argument("values: must be positive");
  }

  const FeatureMatrix features = load_features(opt.base.features);
  const LabelMatrix labels = read_labels(opt.base.labels);
  const bool external = !opt.eval_labels.empty();
  if (external) require_input(opt.eval_labels, "eval_labels");
  const LabelMatrix eval_labels = external ? read_labels(opt.eval_labels) : labels;
  const std::string source = external ? "ground_truth" : "pseudo";

  std::string records;
  for (double v : opt.values) {
    TrainConfig cfg = opt.base.train;
    (opt.param == "alpha" ? cfg.alpha : cfg.beta) = v;
    const Experiment exp = run_experiment(features, labels, cfg, opt.base.test_size, opt.base.split_seed);
    const MetricsReport report = evaluate_experiment(exp, eval_labels, opt.cutoffs, source);
    for (const auto& c : report.cutoffs) {
      const std::pair<const char*, double> scores[] = {
          {"acg", c.acg}, {"ndcg", c.ndcg}, {"map", c.map}, {"wmap", c.wmap}, {"precision", c.precision}};
      for (const auto& [metric, score] : scores) {
        nlohmann::ordered_json j;
        j["param"] = opt.param;
        j["value"] = v;
        j["metric"] = metric;
        j["cutoff"] = c.cutoff;
        j["score"] = score;
        j["code_length"] = report.code_length;
        j["label_source"] = report.label_source;
        records += j.dump() + '\n';
      }
      out << opt.param << '=' << v << " map@" << c.cutoff << '=' << std::setprecision(6) << c.map << '\n';
    }
  }
  write_atomically(opt.out, [&](std::ostream& os) { os << records; });
}

void cmd_synth(const SynthOptions& opt, std::ostream& out) {
  require_output(opt.features, "features");
  require_output(opt.labels, "labels");
  const SyntheticData data = make_synthetic(opt.spec);
  save_features(opt.features, data.features);
  write_atomically(opt.labels, [&](std::ostream& os) { write_labels(os, data.labels); });

  const std::size_t c = data.labels.num_classes();
  std::vector<std::string> names;
  for (std::size_t j = 0; j < c; ++j) names.push_back("class" + std::to_string(j));
  if (!opt.class_map.empty()) {
    write_atomically(opt.class_map, [&](std::ostream& os) {
      for (const auto& name : names) os << name << '\n';
    });
  }
  if (!opt.detections.empty()) {
    // Member classes get confident detections, other classes occasional weak ones.
    std::mt19937_64 rng(opt.spec.seed ^ 0xD1B54A32D192ED03ULL);
    std::uniform_real_distribution<double> strong(0.6, 1.0), weak(0.0, 0.4), coin(0.0, 1.0);
    write_atomically(opt.detections, [&](std::ostream& os) {
      for (std::size_t i = 0; i < data.labels.size(); ++i) {
        nlohmann::ordered_json rec;
        rec["item_id"] = data.labels.ids()[i];
        rec["detections"] = nlohmann::ordered_json::array();
        const auto row = data.labels.row(i);
        for (std::size_t j = 0; j < c; ++j) {
          double score = -1.0;
          if (row[j]) {
            score = strong(rng);
          } else if (coin(rng) < 0.3) {
            score = weak(rng);
          }
          if (score >= 0.0) {
            char buf[16];
            std::snprintf(buf, sizeof buf, "%.3f", score);
            rec["detections"].push_back({{"class_name", names[j]}, {"score", std::stod(buf)}});
          }
        }
        os << rec.dump() << '\n';
      }
    });
  }
  out << "wrote " << data.features.size() << " items, d=" << data.features.dim() << ", classes=" << c << '\n';
}

}  // namespace pseudohash::commands
