#ifndef PSEUDOHASH_METRICS_HPP
#define PSEUDOHASH_METRICS_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pseudohash/labelspace.hpp"
#include "pseudohash/retrieval.hpp"

namespace pseudohash {

/// Relevance of one ranked list: shared-label counts r(j), binary relevance
/// p(j) = [r(j) >= 1], and the number of relevant items in the whole corpus.
struct RelevanceProfile {
  std::vector<int> shared;
  std::vector<int> relevant;
  std::size_t total_relevant = 0;
};

// Cutoffs are 1-based counts of leading positions; every function throws
// std::invalid_argument when n < 1 or the sequence is shorter than n.

/// Mean of r over the first n positions.
double acg_at(std::span<const int> r, std::size_t n);

/// DCG with log2(j + 1) discounts, normalized by the DCG of the whole sequence
/// sorted descending. 0 when that ideal DCG is 0.
double dcg_at(std::span<const int> r, std::size_t n);
double ndcg_at(std::span<const int> r, std::size_t n);

/// Average precision over the first n positions normalized by total_relevant.
/// Empty when total_relevant is 0 (query is skipped).
std::optional<double> ap_at(std::span<const int> p, std::size_t total_relevant, std::size_t n);

/// AP with the precision term replaced by ACG@j. Throws when r and p disagree.
std::optional<double> wmap_at(std::span<const int> r, std::span<const int> p, std::size_t total_relevant,
                              std::size_t n);

double precision_at(std::span<const int> p, std::size_t n);

struct CutoffMetrics {
  std::size_t cutoff = 0;
  double acg = 0.0;
  double ndcg = 0.0;
  double map = 0.0;
  double wmap = 0.0;
  double precision = 0.0;
};

struct MetricsReport {
  std::size_t code_length = 0;
  std::size_t query_count = 0;
  std::size_t skipped_queries = 0;  // N = 0: excluded from MAP and WMAP means
  std::string label_source;
  std::vector<CutoffMetrics> cutoffs;

  const CutoffMetrics& at(std::size_t cutoff) const;
};

/// Ranks `corpus` against every query code, excluding the query's own id when
/// it is stored in the corpus, and averages all five metrics per cutoff.
/// Relevance comes from shared labels in `eval_labels`.
MetricsReport evaluate(const CodeStore& queries, const CodeStore& corpus, const LabelMatrix& eval_labels,
                       std::vector<std::size_t> cutoffs, std::string label_source = "pseudo");

/// Fixed-width table, one row per cutoff.
std::string format_report(const MetricsReport& report);

/// One JSON record per (metric, cutoff) pair.
std::string report_records(const MetricsReport& report, const std::string& method);

}  // namespace pseudohash

#endif  // PSEUDOHASH_METRICS_HPP
