#include "pseudohash/retrieval.hpp"

#include <algorithm>
#include <bit>
#include <random>

#include "pseudohash/hashnet.hpp"
#include "pseudohash/labelspace.hpp"

namespace pseudohash {

Eigen::VectorXi unpack_code(std::span<const std::uint64_t> words, std::size_t k) {
  if (words.size() != words_for(k)) throw std::invalid_argument("unpack_code: word count does not match k");
  Eigen::VectorXi code(static_cast<Eigen::Index>(k));
  for (std::size_t j = 0; j < k; ++j) {
    code(static_cast<Eigen::Index>(j)) = ((words[j / 64] >> (j % 64)) & 1U) ? 1 : -1;
  }
  return code;
}

int hamming(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b, std::size_t k) {
  const std::size_t n = words_for(k);
  if (a.size() != n || b.size() != n) throw std::invalid_argument("hamming: code lengths differ");
  int d = 0;
  for (std::size_t w = 0; w < n; ++w) d += std::popcount(a[w] ^ b[w]);
  return d;
}

CodeStore::CodeStore(std::size_t k) : k_(k), words_per_row_(words_for(k)) {
  if (k == 0) throw std::invalid_argument("code store: code length must be positive");
}

void CodeStore::add(std::string id, std::span<const std::uint64_t> packed) {
  if (packed.size() != words_per_row_) throw std::invalid_argument("code store: packed row has wrong width");
  const std::size_t tail = k_ % 64;
  if (tail != 0 && (packed.back() >> tail) != 0) {
    throw std::invalid_argument("code store: padding bits must be zero");
  }
  if (!index_.emplace(id, ids_.size()).second) throw InputError("duplicate item_id '" + id + "'");
  ids_.push_back(std::move(id));
  words_.insert(words_.end(), packed.begin(), packed.end());
}

std::size_t CodeStore::index_of(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw InputError("unknown item '" + id + "'");
  return it->second;
}

RankedList search(const CodeStore& store, std::span<const std::uint64_t> query, std::size_t top_n,
                  const std::optional<std::string>& exclude_id) {
  if (store.size() == 0) throw std::invalid_argument("search: empty code store");
  if (top_n < 1) throw std::invalid_argument("search: top_n must be at least 1");
  const std::size_t k = store.code_length();

  std::optional<std::size_t> skip;
  if (exclude_id && store.contains(*exclude_id)) skip = store.index_of(*exclude_id);

  std::vector<int> dist(store.size());
  std::vector<std::size_t> histogram(k + 1, 0);
  for (std::size_t i = 0; i < store.size(); ++i) {
    dist[i] = hamming(store.row(i), query, k);
    if (i != skip) ++histogram[static_cast<std::size_t>(dist[i])];
  }

  // Counting pass: find the largest distance that still enters the top n.
  const std::size_t available = store.size() - (skip ? 1 : 0);
  const std::size_t take = std::min(top_n, available);
  std::size_t boundary = 0;
  std::size_t below = 0;
  while (boundary <= k && below + histogram[boundary] < take) below += histogram[boundary++];
  std::size_t boundary_quota = take - below;

  RankedList out;
  out.query_id = exclude_id.value_or("");
  out.cutoff = top_n;
  out.entries.reserve(take);
  for (std::size_t i = 0; i < store.size() && out.entries.size() < take; ++i) {
    if (i == skip) continue;
    const auto d = static_cast<std::size_t>(dist[i]);
    if (d < boundary || (d == boundary && boundary_quota > 0)) {
      if (d == boundary) --boundary_quota;
      out.entries.push_back({store.ids()[i], i, dist[i]});
    }
  }
  std::stable_sort(out.entries.begin(), out.entries.end(),
                   [](const RankedEntry& a, const RankedEntry& b) { return a.distance < b.distance; });
  return out;
}

LshEncoder::LshEncoder(Eigen::Index input_dim, std::size_t k, std::uint64_t seed) {
  if (input_dim < 1 || k < 1) throw std::invalid_argument("lsh: dimensions must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  hyperplanes_.resize(static_cast<Eigen::Index>(k), input_dim);
  for (Eigen::Index j = 0; j < hyperplanes_.rows(); ++j) {
    for (Eigen::Index t = 0; t < input_dim; ++t) hyperplanes_(j, t) = normal(rng);
  }
}

CodeStore LshEncoder::encode(const FeatureMatrix& features) const {
  if (features.dim() != hyperplanes_.cols()) throw std::invalid_argument("lsh: feature dimension mismatch");
  const Eigen::MatrixXd projections = features.values() * hyperplanes_.transpose();
  return CodeStore::from_codes(features.ids(), sign_codes(projections));
}

CodeStore lsh_encode(const FeatureMatrix& features, std::size_t k, std::uint64_t seed) {
  return LshEncoder(features.dim(), k, seed).encode(features);
}

}  // namespace pseudohash
