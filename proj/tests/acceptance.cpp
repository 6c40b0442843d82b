// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <unistd.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "pseudohash/commands.hpp"
#include "pseudohash/io.hpp"
#include "pseudohash/metrics.hpp"
#include "pseudohash/synthetic.hpp"

using namespace pseudohash;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s << std::setprecision(precision) << v;
  return s.str();
}

// Frozen synthetic benchmark -----------------------------------------------

SyntheticSpec benchmark_synthetic() {
  SyntheticSpec spec;  // 500 items, 5 classes, 20% two-label, R^32, centred
  spec.noise = 0.75;
  spec.seed = 7;
  return spec;
}

constexpr std::size_t kTestSize = 100;
constexpr std::uint64_t kSplitSeed = 11;
constexpr std::uint64_t kLshSeed = 5;
constexpr std::size_t kCutoff = 100;

TrainConfig benchmark_config() {
  TrainConfig cfg;  // 30 epochs, batch 128, lr 0.01, alpha 2, beta 100
  cfg.k = 16;
  cfg.seed = 0;
  return cfg;
}

double trained_map(const SyntheticData& data, const TrainConfig& cfg) {
  const auto exp = commands::run_experiment(data.features, data.labels, cfg, kTestSize, kSplitSeed);
  return commands::evaluate_experiment(exp, data.labels, {kCutoff}, "ground_truth").at(kCutoff).map;
}

// Criteria -----------------------------------------------------------------

Outcome gradients() {
  const auto start = Clock::now();
  std::mt19937_64 rng(2024);
  constexpr int kProblems = 200;
  double worst_model = 0.0, worst_u = 0.0;
  std::size_t zero = 0, one = 0, partial = 0;
  int caught_model = 0, caught_u = 0;
  for (int t = 0; t < kProblems; ++t) {
    const auto p = oracle::random_problem(rng);
    for (const auto& pair : p.pairs) {
      if (!pair.indicator) ++partial;
      else if (pair.s == 0.0) ++zero;
      else ++one;
    }
    worst_model = std::max(worst_model, oracle::model_gradient_error(p));
    const Matrix<double> u = forward(p.model, p.x).u;
    worst_u = std::max(worst_u, oracle::u_gradient_error(u, p.codes, p.pairs, p.cfg));
    // the same comparison must flag a slightly wrong gradient, or a zero error proves nothing
    caught_model += oracle::model_gradient_error(p, 1e-5, 1.0 + 1e-3) >= 1e-4;
    caught_u += oracle::u_gradient_error(u, p.codes, p.pairs, p.cfg, 1e-3, 1.0 + 1e-5) >= 1e-6;
  }
  const double elapsed = seconds_since(start);
  const bool mixed = zero > 0 && one > 0 && partial > 0;
  const bool live = caught_model == kProblems && caught_u == kProblems;
  return {worst_model < 1e-4 && worst_u < 1e-6 && mixed && live && elapsed < 30.0,
          std::to_string(kProblems) + " random problems (pairs s=0:" + std::to_string(zero) +
              " s=1:" + std::to_string(one) + " partial:" + std::to_string(partial) +
              "), worst parameter rel. error " + fmt(worst_model, 3) + " (< 1e-4), worst u-level " +
              fmt(worst_u, 3) + " (< 1e-6), distorted gradients flagged " + std::to_string(caught_model) + "/" +
              std::to_string(caught_u) + " of " + std::to_string(kProblems) + ", " + fmt(elapsed, 3) + " s (< 30 s)"};
}

Outcome metric_oracles() {
  const auto start = Clock::now();
  std::size_t lists = 0, mismatches = 0;
  double worst_float = 0.0;
  for (const auto& r : oracle::enumerate_lists(6, 2)) {
    std::vector<int> p(r.size());
    for (std::size_t j = 0; j < r.size(); ++j) p[j] = r[j] >= 1 ? 1 : 0;
    const auto hits = static_cast<std::size_t>(std::count(p.begin(), p.end(), 1));
    for (std::size_t n = 1; n <= r.size(); ++n) {
      mismatches += !oracle::matches(acg_at(r, n), oracle::ref_acg(r, n));
      mismatches += !oracle::matches(precision_at(p, n), oracle::ref_precision(r, n));
      worst_float = std::max(worst_float, std::abs(dcg_at(r, n) - oracle::ref_dcg(r, n)));
      worst_float = std::max(worst_float, std::abs(ndcg_at(r, n) - oracle::ref_ndcg(r, n)));
      for (std::size_t extra : {0, 1, 4}) {
        const std::size_t total = hits + extra;
        const auto ap = ap_at(p, total, n);
        const auto wmap = wmap_at(r, p, total, n);
        if (total == 0) {
          mismatches += ap.has_value() || wmap.has_value();
          continue;
        }
        mismatches += !ap || !oracle::matches(*ap, oracle::ref_ap(r, total, n));
        mismatches += !wmap || !oracle::matches(*wmap, oracle::ref_wmap(r, total, n));
      }
    }
    ++lists;
  }
  const double elapsed = seconds_since(start);
  return {mismatches == 0 && worst_float <= 1e-12 && elapsed < 10.0,
          std::to_string(lists) + " lists, " + std::to_string(mismatches) +
              " rational mismatches, worst DCG/NDCG deviation " + fmt(worst_float, 3) + " (<= 1e-12), " +
              fmt(elapsed, 3) + " s (< 10 s)"};
}

Outcome worked_values() {
  const std::vector<int> r = {2, 0, 1};
  const std::vector<int> p = {1, 0, 1};
  const double z = 3.0 + 1.0 / std::log2(3.0);
  struct Check {
    const char* name;
    double got;
    double want;
  };
  const Check checks[] = {
      {"ACG@3", acg_at(r, 3), 1.0},
      {"DCG@3", dcg_at(r, 3), 3.5},
      {"NDCG@3", ndcg_at(r, 3), 3.5 / z},
      {"AP", ap_at(p, 2, 3).value_or(-1.0), 0.83333},
      {"WMAP", wmap_at(r, p, 2, 3).value_or(-1.0), 1.5},
  };
  bool pass = std::abs(3.5 / z - 0.96394) < 1e-5;
  std::string detail;
  for (const auto& c : checks) {
    pass = pass && std::abs(c.got - c.want) < 1e-5;
    detail += std::string(detail.empty() ? "" : ", ") + c.name + "=" + fmt(c.got, 6);
  }
  return {pass, detail + " (tolerance 1e-5)"};
}

Outcome hamming_engine() {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<std::size_t> length(1, 200);
  std::size_t violations = 0;
  constexpr int kPairs = 10000;
  for (int t = 0; t < kPairs; ++t) {
    const std::size_t k = length(rng);
    const auto a = oracle::random_code(rng, k);
    const auto b = oracle::random_code(rng, k);
    const auto c = oracle::random_code(rng, k);
    const auto pa = pack_code(a), pb = pack_code(b), pc = pack_code(c);
    const int ab = hamming(pa, pb, k);
    violations += ab != oracle::ref_hamming(a, b);
    violations += 2 * ab != static_cast<int>(k) - a.dot(b);
    violations += ab != hamming(pb, pa, k);
    violations += hamming(pa, pa, k) != 0;
    violations += (ab == 0) != (a == b);
    violations += ab < 0 || ab > static_cast<int>(k);
    violations += hamming(pa, pc, k) > ab + hamming(pb, pc, k);
  }

  std::uniform_int_distribution<std::size_t> size(1, 200);
  std::size_t mismatched = 0, tie_heavy = 0;
  constexpr int kStores = 100;
  for (int t = 0; t < kStores; ++t) {
    const bool ties = t % 3 == 0;
    tie_heavy += ties;
    const std::size_t k = ties ? 1 + static_cast<std::size_t>(t) % 4 : length(rng);
    const std::size_t n = size(rng);
    std::vector<Eigen::VectorXi> codes;
    CodeStore store(k);
    for (std::size_t i = 0; i < n; ++i) {
      codes.push_back(oracle::random_code(rng, k));
      store.add("id" + std::to_string(i), pack_code(codes.back()));
    }
    const auto query = oracle::random_code(rng, k);
    const std::size_t top_n = 1 + rng() % n;
    const std::size_t self = rng() % n;
    const auto got = search(store, pack_code(query), top_n);
    const auto want = oracle::ref_search(codes, query, top_n);
    const auto got_ex = search(store, store.row(self), n, store.ids()[self]);
    const auto want_ex = oracle::ref_search(codes, codes[self], n, static_cast<std::ptrdiff_t>(self));
    auto same = [](const RankedList& g, const std::vector<std::pair<int, std::size_t>>& w) {
      if (g.entries.size() != w.size()) return false;
      for (std::size_t i = 0; i < w.size(); ++i) {
        if (g.entries[i].distance != w[i].first || g.entries[i].index != w[i].second) return false;
      }
      return true;
    };
    mismatched += !same(got, want) || !same(got_ex, want_ex);
  }
  return {violations == 0 && mismatched == 0,
          std::to_string(kPairs) + " random pairs/triples, " + std::to_string(violations) +
              " axiom or identity violations; " + std::to_string(kStores) + " stores (" +
              std::to_string(tie_heavy) + " tie-heavy), " + std::to_string(mismatched) +
              " disagreements with the naive sort"};
}

Outcome benchmark(const SyntheticData& data) {
  const auto start = Clock::now();
  const auto exp = commands::run_experiment(data.features, data.labels, benchmark_config(), kTestSize, kSplitSeed);
  const double trained = commands::evaluate_experiment(exp, data.labels, {kCutoff}, "ground_truth").at(kCutoff).map;
  const double elapsed = seconds_since(start);
  const double lsh =
      commands::evaluate_lsh_baseline(exp, data.labels, {kCutoff}, kLshSeed, "ground_truth").at(kCutoff).map;

  const auto& codes = exp.result.codes;
  double intra = 0.0, inter = 0.0;
  std::size_t n_intra = 0, n_inter = 0;
  for (std::size_t i = 0; i < codes.size(); ++i) {
    const auto li = data.labels.row(data.labels.index_of(codes.ids()[i]));
    for (std::size_t j = i + 1; j < codes.size(); ++j) {
      const auto lj = data.labels.row(data.labels.index_of(codes.ids()[j]));
      const int d = hamming(codes.row(i), codes.row(j), codes.code_length());
      if (similarity(li, lj) > 0.0) {
        intra += d;
        ++n_intra;
      } else {
        inter += d;
        ++n_inter;
      }
    }
  }
  intra /= static_cast<double>(n_intra);
  inter /= static_cast<double>(n_inter);
  const double initial = exp.result.initial_objective.total;
  const double final_loss = exp.result.final_objective.total;
  return {final_loss < initial && intra < inter && trained >= lsh + 0.15 && elapsed < 120.0,
          "loss " + fmt(initial, 6) + " -> " + fmt(final_loss, 6) + ", Hamming intra " + fmt(intra) + " < inter " +
              fmt(inter) + ", MAP@100 trained " + fmt(trained) + " vs LSH " + fmt(lsh) + " (gap " +
              fmt(trained - lsh) + " >= 0.15), train+eval " + fmt(elapsed, 3) + " s (< 120 s)"};
}

Outcome sensitivity(const SyntheticData& data) {
  auto spread = [&](const std::vector<double>& values, double TrainConfig::*field, std::string& detail) {
    double lo = 1.0, hi = 0.0;
    for (double v : values) {
      auto cfg = benchmark_config();
      cfg.*field = v;
      const double map = trained_map(data, cfg);
      lo = std::min(lo, map);
      hi = std::max(hi, map);
      detail += " " + fmt(v) + ":" + fmt(map);
    }
    return hi - lo;
  };
  std::string alpha_detail, beta_detail;
  const double alpha = spread({1.0, 2.0, 5.0}, &TrainConfig::alpha, alpha_detail);
  const double beta = spread({80.0, 100.0, 150.0}, &TrainConfig::beta, beta_detail);
  return {alpha < 0.05 && beta < 0.05, "MAP@100 alpha{" + alpha_detail + " } spread " + fmt(alpha) + ", beta{" +
                                           beta_detail + " } spread " + fmt(beta) + " (each < 0.05)"};
}

Outcome determinism(const SyntheticData& data) {
  const fs::path dir = fs::temp_directory_path() / ("pseudohash_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  save_features(dir / "features.bin", data.features);
  write_labels(dir / "labels.txt", data.labels);
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  std::ostringstream sink;
  for (const char* run : {"a", "b"}) {
    commands::TrainOptions opt;
    opt.features = dir / "features.bin";
    opt.labels = dir / "labels.txt";
    opt.checkpoint = dir / (std::string(run) + ".model");
    opt.codes = dir / (std::string(run) + ".codes");
    opt.train = benchmark_config();
    commands::cmd_train(opt, sink);
  }
  const std::string model_a = slurp(dir / "a.model"), codes_a = slurp(dir / "a.codes");
  const bool same_model = !model_a.empty() && model_a == slurp(dir / "b.model");
  const bool same_codes = !codes_a.empty() && codes_a == slurp(dir / "b.codes");
  fs::remove_all(dir);
  return {same_model && same_codes, std::string("checkpoints ") + (same_model ? "identical" : "differ") + " (" +
                                        std::to_string(model_a.size()) + " bytes), codes " +
                                        (same_codes ? "identical" : "differ") + " (" +
                                        std::to_string(codes_a.size()) + " bytes)"};
}

}  // namespace

int main() {
  const auto data = make_synthetic(benchmark_synthetic());
  const std::vector<std::function<Outcome()>> criteria = {
      gradients,
      metric_oracles,
      worked_values,
      hamming_engine,
      [&] { return benchmark(data); },
      [&] { return sensitivity(data); },
      [&] { return determinism(data); },
  };
  int failures = 0;
  for (std::size_t c = 0; c < criteria.size(); ++c) {
    Outcome outcome;
    try {
      outcome = criteria[c]();
    } catch (const std::exception& e) {
      outcome = {false, std::string("threw: ") + e.what()};
    }
    failures += !outcome.pass;
    std::cout << (outcome.pass ? "PASS" : "FAIL") << " criterion " << c + 1 << ": " << outcome.detail << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
