#include <set>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "oracles.hpp"
#include "pseudohash/metrics.hpp"

using namespace pseudohash;

namespace {

std::vector<int> indicators(const std::vector<int>& r) {
  std::vector<int> p;
  for (int v : r) p.push_back(v >= 1 ? 1 : 0);
  return p;
}

}  // namespace

TEST_CASE("worked values") {
  const std::vector<int> r = {2, 0, 1};
  const std::vector<int> p = {1, 0, 1};
  CHECK(acg_at(r, 3) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(dcg_at(r, 3) == doctest::Approx(3.5).epsilon(1e-12));
  CHECK(ndcg_at(r, 3) == doctest::Approx(3.5 / (3.0 + 1.0 / std::log2(3.0))).epsilon(1e-12));
  CHECK(std::abs(ndcg_at(r, 3) - 0.96394) < 1e-5);
  CHECK(*ap_at(p, 2, 3) == doctest::Approx(5.0 / 6.0).epsilon(1e-12));
  CHECK(*wmap_at(r, p, 2, 3) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(precision_at(p, 3) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("degenerate lists") {
  const std::vector<int> zeros(4, 0);
  const std::vector<int> ones(4, 1);
  CHECK(acg_at(zeros, 4) == 0.0);
  CHECK(acg_at(std::vector<int>{5}, 1) == 5.0);
  CHECK(ndcg_at(zeros, 4) == 0.0);
  CHECK(ndcg_at(std::vector<int>{2, 2, 1, 0}, 4) == doctest::Approx(1.0));
  CHECK(*ap_at(std::vector<int>{1, 1, 0, 0}, 2, 4) == 1.0);
  CHECK(*ap_at(zeros, 3, 4) == 0.0);
  CHECK_FALSE(ap_at(zeros, 0, 4).has_value());
  CHECK(*wmap_at(ones, ones, 4, 4) == doctest::Approx(1.0));
  CHECK(*wmap_at(zeros, zeros, 2, 4) == 0.0);
  CHECK_FALSE(wmap_at(zeros, zeros, 0, 4).has_value());
  CHECK(precision_at(ones, 4) == 1.0);
  CHECK(precision_at(std::vector<int>{0, 1}, 1) == 0.0);
}

TEST_CASE("cutoff and consistency errors") {
  const std::vector<int> r = {1, 0};
  CHECK_THROWS_AS(acg_at(r, 0), std::invalid_argument);
  CHECK_THROWS_AS(acg_at(r, 3), std::invalid_argument);
  CHECK_THROWS_AS(ndcg_at(r, 3), std::invalid_argument);
  CHECK_THROWS_AS(precision_at(r, 3), std::invalid_argument);
  CHECK_THROWS_AS(ap_at(r, 1, 3), std::invalid_argument);
  CHECK_THROWS_AS(wmap_at(std::vector<int>{2, 0}, std::vector<int>{0, 0}, 1, 2), std::invalid_argument);
  CHECK_THROWS_AS(wmap_at(std::vector<int>{2, 0}, std::vector<int>{1}, 1, 1), std::invalid_argument);
}

TEST_CASE("all metrics agree with brute-force references on every short list") {
  std::size_t lists = 0;
  double worst_ndcg = 0.0;
  for (const auto& r : oracle::enumerate_lists(6, 2)) {
    const auto p = indicators(r);
    const std::size_t relevant = static_cast<std::size_t>(std::count(p.begin(), p.end(), 1));
    for (std::size_t n = 1; n <= r.size(); ++n) {
      CHECK(oracle::matches(acg_at(r, n), oracle::ref_acg(r, n)));
      CHECK(oracle::matches(precision_at(p, n), oracle::ref_precision(r, n)));
      const double ndcg = ndcg_at(r, n);
      worst_ndcg = std::max(worst_ndcg, std::abs(ndcg - oracle::ref_ndcg(r, n)));
      CHECK(ndcg >= 0.0);
      CHECK(ndcg <= 1.0 + 1e-12);
      // N counts relevant items beyond the list too
      for (std::size_t extra : {std::size_t{0}, std::size_t{1}, std::size_t{4}}) {
        const std::size_t total = relevant + extra;
        const auto ap = ap_at(p, total, n);
        const auto wmap = wmap_at(r, p, total, n);
        REQUIRE(ap.has_value() == (total > 0));
        REQUIRE(wmap.has_value() == (total > 0));
        if (total > 0) {
          CHECK(oracle::matches(*ap, oracle::ref_ap(r, total, n)));
          CHECK(oracle::matches(*wmap, oracle::ref_wmap(r, total, n)));
        }
      }
    }
    ++lists;
  }
  CHECK(lists == 3 + 9 + 27 + 81 + 243 + 729);
  CHECK(worst_ndcg <= 1e-12);
}

TEST_CASE("ndcg equals one exactly on ideally ordered prefixes") {
  for (const auto& r : oracle::enumerate_lists(5, 2)) {
    for (std::size_t n = 1; n <= r.size(); ++n) {
      std::vector<int> sorted = r;
      std::sort(sorted.begin(), sorted.end(), std::greater<>());
      const bool ideal = std::equal(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(n), sorted.begin());
      const bool any = std::any_of(r.begin(), r.end(), [](int v) { return v > 0; });
      if (!any) continue;
      CHECK((std::abs(ndcg_at(r, n) - 1.0) < 1e-12) == ideal);
    }
  }
}

TEST_CASE("ap ignores what follows the last relevant item") {
  const std::vector<int> base = {1, 0, 1, 0, 0, 0};
  for (const auto& tail : oracle::enumerate_lists(3, 1)) {
    if (tail.size() != 3) continue;
    std::vector<int> p = {1, 0, 1};
    p.insert(p.end(), tail.begin(), tail.end());
    CHECK(*ap_at(p, 5, 3) == *ap_at(base, 5, 3));
  }
}

namespace {

struct Corpus {
  std::vector<std::string> ids;
  std::vector<Eigen::VectorXi> codes;
  LabelMatrix labels;
};

Corpus random_corpus(std::mt19937_64& rng, std::size_t n, std::size_t k, std::size_t c) {
  Corpus out;
  std::bernoulli_distribution coin(0.3);
  LabelBits bits = LabelBits::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(c));
  for (std::size_t i = 0; i < n; ++i) {
    out.ids.push_back("item" + std::to_string(i));
    out.codes.push_back(oracle::random_code(rng, k));
    for (std::size_t j = 0; j < c; ++j) bits(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = coin(rng);
  }
  out.labels = LabelMatrix(out.ids, bits);
  return out;
}

CodeStore store_from(const std::vector<std::string>& ids, const std::vector<Eigen::VectorXi>& codes) {
  CodeStore store(static_cast<std::size_t>(codes.front().size()));
  for (std::size_t i = 0; i < ids.size(); ++i) store.add(ids[i], pack_code(codes[i]));
  return store;
}

}  // namespace

TEST_CASE("evaluate matches a naive reimplementation") {
  std::mt19937_64 rng(31);
  const auto corpus = random_corpus(rng, 50, 16, 4);
  const CodeStore store = store_from(corpus.ids, corpus.codes);
  const std::vector<std::size_t> cutoffs = {1, 5, 20, 49};
  const auto report = evaluate(store, store, corpus.labels, {20, 5, 49, 1, 5});

  REQUIRE(report.cutoffs.size() == cutoffs.size());
  CHECK(report.query_count == 50);
  CHECK(report.code_length == 16);
  CHECK(report.label_source == "pseudo");

  for (std::size_t c = 0; c < cutoffs.size(); ++c) {
    const std::size_t n = cutoffs[c];
    std::vector<double> acg, ndcg, ap, wmap, prec;
    std::size_t skipped = 0;
    for (std::size_t q = 0; q < corpus.ids.size(); ++q) {
      const auto ranked = oracle::ref_search(corpus.codes, corpus.codes[q], corpus.codes.size(),
                                             static_cast<std::ptrdiff_t>(q));
      std::vector<int> r;
      for (const auto& [dist, idx] : ranked) {
        int shared = 0;
        for (std::size_t j = 0; j < 4; ++j) shared += corpus.labels.row(q)[j] & corpus.labels.row(idx)[j];
        r.push_back(shared);
      }
      const auto total = static_cast<std::size_t>(std::count_if(r.begin(), r.end(), [](int v) { return v > 0; }));
      acg.push_back(std::accumulate(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(n), 0.0) / static_cast<double>(n));
      ndcg.push_back(oracle::ref_dcg(r, n) == 0.0 ? 0.0 : ndcg_at(r, n));
      prec.push_back(oracle::ref_precision(r, n).value());
      if (total == 0) {
        ++skipped;
        continue;
      }
      // Long lists overflow the exact rational references; recount in doubles.
      double ap_sum = 0.0, wmap_sum = 0.0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (r[j - 1] == 0) continue;
        double hits = 0.0, gain = 0.0;
        for (std::size_t t = 0; t < j; ++t) {
          hits += r[t] > 0 ? 1.0 : 0.0;
          gain += r[t];
        }
        ap_sum += hits / static_cast<double>(j);
        wmap_sum += gain / static_cast<double>(j);
      }
      ap.push_back(ap_sum / static_cast<double>(total));
      wmap.push_back(wmap_sum / static_cast<double>(total));
    }
    auto mean = [](const std::vector<double>& v) {
      return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    };
    const auto& m = report.at(n);
    CHECK(m.cutoff == n);
    CHECK(m.acg == doctest::Approx(mean(acg)).epsilon(1e-12));
    CHECK(m.ndcg == doctest::Approx(mean(ndcg)).epsilon(1e-12));
    CHECK(m.precision == doctest::Approx(mean(prec)).epsilon(1e-12));
    CHECK(m.map == doctest::Approx(mean(ap)).epsilon(1e-12));
    CHECK(m.wmap == doctest::Approx(mean(wmap)).epsilon(1e-12));
    CHECK(report.skipped_queries == skipped);
  }
  CHECK_THROWS_AS(evaluate(store, store, corpus.labels, {50}), std::invalid_argument);
  CHECK_THROWS_AS(report.at(7), std::out_of_range);
}

TEST_CASE("evaluate examples") {
  SUBCASE("exact duplicates with identical labels") {
    std::mt19937_64 rng(1);
    std::vector<std::string> qids, cids;
    std::vector<Eigen::VectorXi> codes;
    LabelBits bits = LabelBits::Ones(10, 2);
    for (int i = 0; i < 5; ++i) {
      codes.push_back(oracle::random_code(rng, 16));
      qids.push_back("q" + std::to_string(i));
      cids.push_back("c" + std::to_string(i));
    }
    std::vector<std::string> all = qids;
    all.insert(all.end(), cids.begin(), cids.end());
    const LabelMatrix labels(all, bits);
    const auto report = evaluate(store_from(qids, codes), store_from(cids, codes), labels, {1}, "ground_truth");
    const auto& m = report.at(1);
    CHECK(m.acg == 2.0);
    CHECK(m.ndcg == 1.0);
    CHECK(m.map == 1.0 / 5.0);
    CHECK(m.precision == 1.0);
    CHECK(report.label_source == "ground_truth");
  }
  SUBCASE("disjoint labels skip every query") {
    std::mt19937_64 rng(2);
    std::vector<std::string> ids;
    std::vector<Eigen::VectorXi> codes;
    LabelBits bits = LabelBits::Identity(6, 6);
    for (int i = 0; i < 6; ++i) {
      ids.push_back("x" + std::to_string(i));
      codes.push_back(oracle::random_code(rng, 8));
    }
    const auto store = store_from(ids, codes);
    const auto report = evaluate(store, store, LabelMatrix(ids, bits), {1, 5});
    CHECK(report.skipped_queries == 6);
    CHECK(report.at(5).precision == 0.0);
    CHECK(report.at(5).map == 0.0);
  }
  SUBCASE("missing labels") {
    std::mt19937_64 rng(3);
    const auto corpus = random_corpus(rng, 5, 8, 2);
    const auto store = store_from(corpus.ids, corpus.codes);
    const auto partial = corpus.labels.select({"item0", "item1", "item2"});
    CHECK_THROWS(evaluate(store, store, partial, {1}));
  }
}

TEST_CASE("evaluate is independent of query order") {
  std::mt19937_64 rng(41);
  const auto corpus = random_corpus(rng, 60, 12, 5);
  const auto store = store_from(corpus.ids, corpus.codes);
  std::vector<std::size_t> order(corpus.ids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::string> ids;
  std::vector<Eigen::VectorXi> codes;
  for (auto i : order) {
    ids.push_back(corpus.ids[i]);
    codes.push_back(corpus.codes[i]);
  }
  const auto a = evaluate(store, store, corpus.labels, {10, 30});
  const auto b = evaluate(store_from(ids, codes), store, corpus.labels, {10, 30});
  for (std::size_t n : {10, 30}) {
    CHECK(a.at(n).map == b.at(n).map);
    CHECK(a.at(n).wmap == b.at(n).wmap);
    CHECK(a.at(n).ndcg == b.at(n).ndcg);
    CHECK(a.at(n).acg == b.at(n).acg);
    CHECK(a.at(n).precision == b.at(n).precision);
  }
}

TEST_CASE("report output") {
  MetricsReport report;
  report.code_length = 16;
  report.query_count = 3;
  report.skipped_queries = 1;
  report.label_source = "pseudo";
  report.cutoffs.push_back({10, 0.5, 0.6, 0.7, 0.8, 0.9});
  const std::string table = format_report(report);
  CHECK(table.find("0.7000") != std::string::npos);
  std::istringstream lines(report_records(report, "trained"));
  std::string line;
  std::set<std::string> metrics;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j["method"] == "trained");
    CHECK(j["cutoff"] == 10);
    CHECK(j["code_length"] == 16);
    CHECK(j["label_source"] == "pseudo");
    metrics.insert(j["metric"].get<std::string>());
  }
  CHECK(metrics == std::set<std::string>{"acg", "ndcg", "map", "wmap", "precision"});
}
