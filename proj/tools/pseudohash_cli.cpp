#include <exception>
#include <iostream>
#include <memory>
#include <set>
#include <string>

#include "CLI11.hpp"
#include "pseudohash/commands.hpp"

namespace cmd = pseudohash::commands;

namespace {

// Config files are flat key = value lists; every key belongs to the active subcommand.
class FlatConfig : public CLI::ConfigINI {
 public:
  explicit FlatConfig(std::string subcommand) : subcommand_(std::move(subcommand)) {}

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    auto items = CLI::ConfigINI::from_config(input);
    for (auto& item : items) {
      if (item.parents.empty() && item.name != "++" && item.name != "--" && !subcommand_.empty()) {
        item.parents = {subcommand_};
      }
    }
    return items;
  }

 private:
  std::string subcommand_;
};

struct TrainFlags {
  std::string lr_schedule = "every_third_of_epochs";
  std::string similarity = "dense";
};

void add_train_options(CLI::App* sub, cmd::TrainOptions& opt, TrainFlags& flags) {
  auto& t = opt.train;
  sub->add_option("--features", opt.features, "Feature file")->required();
  sub->add_option("--labels", opt.labels, "Label file")->required();
  sub->add_option("--epochs", t.epochs)->capture_default_str();
  sub->add_option("--batch_size", t.batch_size)->capture_default_str();
  sub->add_option("--lr", t.lr)->capture_default_str();
  sub->add_option("--lr_schedule", flags.lr_schedule, "every_third_of_epochs | every_k_iters")->capture_default_str();
  sub->add_option("--lr_step_iters", t.lr_step_iters)->capture_default_str();
  sub->add_option("--alpha", t.alpha)->capture_default_str();
  sub->add_option("--beta", t.beta)->capture_default_str();
  sub->add_option("--seed", t.seed)->capture_default_str();
  sub->add_option("--k", t.k, "Code length in bits")->capture_default_str();
  sub->add_option("--hidden_dims", t.hidden_dims, "Comma-separated hidden widths")
      ->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  sub->add_option("--step_divisor", t.step_divisor)->capture_default_str();
  sub->add_option("--similarity", flags.similarity, "dense | on_demand")->capture_default_str();
  sub->add_option("--test_size", opt.test_size, "Held-out query items")->capture_default_str();
  sub->add_option("--split_seed", opt.split_seed)->capture_default_str();
}

void finish_train_options(cmd::TrainOptions& opt, const TrainFlags& flags) {
  opt.train.lr_schedule = pseudohash::parse_lr_schedule(flags.lr_schedule);
  opt.train.similarity = pseudohash::parse_similarity_mode(flags.similarity);
}

std::string find_subcommand(int argc, char** argv, const std::set<std::string>& names) {
  for (int i = 1; i < argc; ++i) {
    if (names.count(argv[i]) != 0) return argv[i];
  }
  return {};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Binary hashing from pseudo-labels: ingest, train, encode, query, evaluate"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Flat key = value file supplying any option");
  app.allow_config_extras(false);
  // repeated scalar flags: last one wins
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  cmd::IngestOptions ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "Threshold detections into a pseudo-label file");
  ingest_cmd->add_option("--detections", ingest.detections, "JSONL detections")->required();
  ingest_cmd->add_option("--class_map", ingest.class_map, "One class name per line")->required();
  ingest_cmd->add_option("--threshold", ingest.threshold)->capture_default_str();
  ingest_cmd->add_option("--out", ingest.out, "Label file to write")->required();

  cmd::TrainOptions train;
  TrainFlags train_flags;
  auto* train_cmd = app.add_subcommand("train", "Train a hashing model");
  add_train_options(train_cmd, train, train_flags);
  train_cmd->add_option("--checkpoint", train.checkpoint)->required();
  train_cmd->add_option("--codes", train.codes, "Codes for the training corpus")->required();
  train_cmd->add_option("--query_codes", train.query_codes, "Codes for the held-out items");
  train_cmd->add_option("--log", train.log, "JSONL training log");

  cmd::EncodeOptions encode;
  auto* encode_cmd = app.add_subcommand("encode", "Encode features with a trained checkpoint");
  encode_cmd->add_option("--checkpoint", encode.checkpoint)->required();
  encode_cmd->add_option("--features", encode.features)->required();
  encode_cmd->add_option("--out", encode.out)->required();

  cmd::QueryOptions query;
  auto* query_cmd = app.add_subcommand("query", "Hamming nearest neighbours from a codes file");
  query_cmd->add_option("--codes", query.codes)->required();
  auto* id_opt = query_cmd->add_option("--id", query.id, "Stored item to query with");
  auto* vec_opt = query_cmd->add_option("--vector", query.bits, "Query code as a 0/1 string");
  id_opt->excludes(vec_opt);
  query_cmd->add_option("--top_n", query.top_n)->capture_default_str();
  query_cmd->add_flag("--exclude_self", query.exclude_self, "Drop the query item from its own results");

  cmd::EvaluateOptions evaluate;
  auto* eval_cmd = app.add_subcommand("evaluate", "Ranking metrics for query codes against corpus codes");
  eval_cmd->add_option("--queries", evaluate.queries)->required();
  eval_cmd->add_option("--corpus", evaluate.corpus)->required();
  eval_cmd->add_option("--labels", evaluate.labels)->required();
  eval_cmd->add_option("--label_source", evaluate.label_source, "Recorded in the report")->capture_default_str();
  eval_cmd->add_option("--cutoffs", evaluate.cutoffs)
      ->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
      ->capture_default_str();
  eval_cmd->add_option("--report", evaluate.report, "JSONL report to write");
  eval_cmd->add_option("--lsh_features", evaluate.lsh_features, "Also evaluate an LSH baseline on these features");
  eval_cmd->add_option("--lsh_seed", evaluate.lsh_seed)->capture_default_str();

  cmd::SweepOptions sweep;
  TrainFlags sweep_flags;
  auto* sweep_cmd = app.add_subcommand("sweep", "Retrain across alpha or beta values and record metrics");
  add_train_options(sweep_cmd, sweep.base, sweep_flags);
  sweep_cmd->add_option("--eval_labels", sweep.eval_labels, "Labels used for relevance (default: --labels)");
  sweep_cmd->add_option("--param", sweep.param, "alpha | beta")->required();
  sweep_cmd->add_option("--values", sweep.values)
      ->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
      ->required();
  sweep_cmd->add_option("--cutoffs", sweep.cutoffs)
      ->delimiter(',')
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
      ->capture_default_str();
  sweep_cmd->add_option("--out", sweep.out, "JSONL records")->required();

  cmd::SynthOptions synth;
  auto* synth_cmd = app.add_subcommand("synth", "Write a Gaussian-cluster benchmark");
  synth_cmd->add_option("--items", synth.spec.items)->capture_default_str();
  synth_cmd->add_option("--classes", synth.spec.classes)->capture_default_str();
  synth_cmd->add_option("--multi_label_fraction", synth.spec.multi_label_fraction)->capture_default_str();
  synth_cmd->add_option("--dim", synth.spec.dim)->capture_default_str();
  synth_cmd->add_option("--center_scale", synth.spec.center_scale)->capture_default_str();
  synth_cmd->add_option("--noise", synth.spec.noise)->capture_default_str();
  synth_cmd->add_option("--seed", synth.spec.seed)->capture_default_str();
  synth_cmd->add_option("--features", synth.features)->required();
  synth_cmd->add_option("--labels", synth.labels, "Ground-truth label file")->required();
  synth_cmd->add_option("--detections", synth.detections, "Simulated detector output (JSONL)");
  synth_cmd->add_option("--class_map", synth.class_map);

  std::set<std::string> names;
  for (auto* sub : app.get_subcommands({})) {
    sub->fallthrough();
    names.insert(sub->get_name());
  }
  app.config_formatter(std::make_shared<FlatConfig>(find_subcommand(argc, argv, names)));

  CLI11_PARSE(app, argc, argv);

  try {
    if (ingest_cmd->parsed()) {
      cmd::cmd_ingest(ingest, std::cout, std::cerr);
    } else if (train_cmd->parsed()) {
      finish_train_options(train, train_flags);
      cmd::cmd_train(train, std::cout);
    } else if (encode_cmd->parsed()) {
      cmd::cmd_encode(encode, std::cout);
    } else if (query_cmd->parsed()) {
      cmd::cmd_query(query, std::cout, std::cerr);
    } else if (eval_cmd->parsed()) {
      cmd::cmd_evaluate(evaluate, std::cout);
    } else if (sweep_cmd->parsed()) {
      finish_train_options(sweep.base, sweep_flags);
      cmd::cmd_sweep(sweep, std::cout);
    } else if (synth_cmd->parsed()) {
      cmd::cmd_synth(synth, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
