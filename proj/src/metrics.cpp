#include "pseudohash/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace pseudohash {

namespace {

void check_cutoff(std::size_t length, std::size_t n) {
  if (n < 1) throw std::invalid_argument("cutoff must be at least 1");
  if (length < n) {
    throw std::invalid_argument("ranked list of length " + std::to_string(length) + " is shorter than cutoff " +
                                std::to_string(n));
  }
}

double discounted_gain(std::span<const int> r, std::size_t n) {
  double dcg = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    dcg += (std::exp2(static_cast<double>(r[j])) - 1.0) / std::log2(static_cast<double>(j) + 2.0);
  }
  return dcg;
}

// Order-independent mean: values are sorted before summation.
double stable_mean(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

}  // namespace

double acg_at(std::span<const int> r, std::size_t n) {
  check_cutoff(r.size(), n);
  const long sum = std::accumulate(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(n), 0L);
  return static_cast<double>(sum) / static_cast<double>(n);
}

double dcg_at(std::span<const int> r, std::size_t n) {
  check_cutoff(r.size(), n);
  return discounted_gain(r, n);
}

double ndcg_at(std::span<const int> r, std::size_t n) {
  check_cutoff(r.size(), n);
  std::vector<int> ideal(r.begin(), r.end());
  std::sort(ideal.begin(), ideal.end(), std::greater<>());
  const double z = discounted_gain(ideal, n);
  if (z == 0.0) return 0.0;
  return discounted_gain(r, n) / z;
}

std::optional<double> ap_at(std::span<const int> p, std::size_t total_relevant, std::size_t n) {
  check_cutoff(p.size(), n);
  if (total_relevant == 0) return std::nullopt;
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (p[j] == 0) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(j + 1);
  }
  return sum / static_cast<double>(total_relevant);
}

std::optional<double> wmap_at(std::span<const int> r, std::span<const int> p, std::size_t total_relevant,
                              std::size_t n) {
  if (r.size() != p.size()) throw std::invalid_argument("wmap: relevance sequences differ in length");
  check_cutoff(r.size(), n);
  for (std::size_t j = 0; j < r.size(); ++j) {
    if ((p[j] != 0) != (r[j] >= 1)) {
      throw std::invalid_argument("wmap: p(" + std::to_string(j + 1) + ") disagrees with r");
    }
  }
  if (total_relevant == 0) return std::nullopt;
  double sum = 0.0;
  long gain = 0;
  for (std::size_t j = 0; j < n; ++j) {
    gain += r[j];
    if (p[j] != 0) sum += static_cast<double>(gain) / static_cast<double>(j + 1);
  }
  return sum / static_cast<double>(total_relevant);
}

double precision_at(std::span<const int> p, std::size_t n) {
  check_cutoff(p.size(), n);
  const auto hits = std::count_if(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(n), [](int v) { return v != 0; });
  return static_cast<double>(hits) / static_cast<double>(n);
}

const CutoffMetrics& MetricsReport::at(std::size_t cutoff) const {
  for (const auto& c : cutoffs) {
    if (c.cutoff == cutoff) return c;
  }
  throw std::out_of_range("report has no cutoff " + std::to_string(cutoff));
}

MetricsReport evaluate(const CodeStore& queries, const CodeStore& corpus, const LabelMatrix& eval_labels,
                       std::vector<std::size_t> cutoffs, std::string label_source) {
  if (queries.code_length() != corpus.code_length()) {
    throw std::invalid_argument("evaluate: query and corpus code lengths differ");
  }
  if (cutoffs.empty()) throw std::invalid_argument("evaluate: no cutoffs");
  std::sort(cutoffs.begin(), cutoffs.end());
  cutoffs.erase(std::unique(cutoffs.begin(), cutoffs.end()), cutoffs.end());
  if (cutoffs.front() < 1) throw std::invalid_argument("evaluate: cutoffs must be positive");

  std::vector<std::size_t> corpus_rows(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) corpus_rows[i] = eval_labels.index_of(corpus.ids()[i]);

  const std::size_t m = cutoffs.size();
  std::vector<std::vector<double>> acg(m), ndcg(m), ap(m), wmap(m), prec(m);
  MetricsReport report;
  report.code_length = corpus.code_length();
  report.query_count = queries.size();
  report.label_source = std::move(label_source);

  for (std::size_t q = 0; q < queries.size(); ++q) {
    const auto& qid = queries.ids()[q];
    const auto query_labels = eval_labels.row(eval_labels.index_of(qid));
    const RankedList ranked = search(corpus, queries.row(q), corpus.size(), qid);
    if (ranked.entries.size() < cutoffs.back()) {
      throw std::invalid_argument("evaluate: cutoff " + std::to_string(cutoffs.back()) + " exceeds the " +
                                  std::to_string(ranked.entries.size()) + " searchable corpus items");
    }

    RelevanceProfile rel;
    rel.shared.reserve(ranked.entries.size());
    for (const auto& e : ranked.entries) {
      const auto item_labels = eval_labels.row(corpus_rows[e.index]);
      int shared = 0;
      for (std::size_t c = 0; c < item_labels.size(); ++c) shared += (item_labels[c] && query_labels[c]) ? 1 : 0;
      rel.shared.push_back(shared);
      rel.relevant.push_back(shared >= 1 ? 1 : 0);
      rel.total_relevant += shared >= 1 ? 1 : 0;
    }

    bool skipped = false;
    for (std::size_t c = 0; c < m; ++c) {
      const std::size_t n = cutoffs[c];
      acg[c].push_back(acg_at(rel.shared, n));
      ndcg[c].push_back(ndcg_at(rel.shared, n));
      prec[c].push_back(precision_at(rel.relevant, n));
      const auto a = ap_at(rel.relevant, rel.total_relevant, n);
      const auto w = wmap_at(rel.shared, rel.relevant, rel.total_relevant, n);
      if (a) {
        ap[c].push_back(*a);
        wmap[c].push_back(*w);
      } else {
        skipped = true;
      }
    }
    report.skipped_queries += skipped ? 1 : 0;
  }

  for (std::size_t c = 0; c < m; ++c) {
    CutoffMetrics cm;
    cm.cutoff = cutoffs[c];
    cm.acg = stable_mean(std::move(acg[c]));
    cm.ndcg = stable_mean(std::move(ndcg[c]));
    cm.map = stable_mean(std::move(ap[c]));
    cm.wmap = stable_mean(std::move(wmap[c]));
    cm.precision = stable_mean(std::move(prec[c]));
    report.cutoffs.push_back(cm);
  }
  return report;
}

std::string format_report(const MetricsReport& report) {
  std::ostringstream out;
  out << "code_length=" << report.code_length << " queries=" << report.query_count
      << " skipped=" << report.skipped_queries << " labels=" << report.label_source << '\n';
  out << std::left << std::setw(8) << "cutoff" << std::right;
  for (const char* name : {"MAP", "WMAP", "NDCG", "ACG", "Precision"}) out << std::setw(11) << name;
  out << '\n' << std::fixed << std::setprecision(4);
  for (const auto& c : report.cutoffs) {
    out << std::left << std::setw(8) << c.cutoff << std::right << std::setw(11) << c.map << std::setw(11) << c.wmap
        << std::setw(11) << c.ndcg << std::setw(11) << c.acg << std::setw(11) << c.precision << '\n';
  }
  return out.str();
}

std::string report_records(const MetricsReport& report, const std::string& method) {
  std::ostringstream out;
  for (const auto& c : report.cutoffs) {
    const std::pair<const char*, double> values[] = {
        {"map", c.map}, {"wmap", c.wmap}, {"ndcg", c.ndcg}, {"acg", c.acg}, {"precision", c.precision}};
    for (const auto& [metric, value] : values) {
      nlohmann::ordered_json rec;
      rec["method"] = method;
      rec["metric"] = metric;
      rec["cutoff"] = c.cutoff;
      rec["code_length"] = report.code_length;
      rec["value"] = value;
      rec["queries"] = report.query_count;
      rec["skipped"] = report.skipped_queries;
      rec["label_source"] = report.label_source;
      out << rec.dump() << '\n';
    }
  }
  return out.str();
}

}  // namespace pseudohash
