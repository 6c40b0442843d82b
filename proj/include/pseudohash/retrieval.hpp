#ifndef PSEUDOHASH_RETRIEVAL_HPP
#define PSEUDOHASH_RETRIEVAL_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "pseudohash/dataset.hpp"

namespace pseudohash {

/// Number of 64-bit words holding a k-bit code.
constexpr std::size_t words_for(std::size_t k) { return (k + 63) / 64; }

/// Packs a ±1 code: bit j of the row is code[j] > 0. Bit j lives in word j / 64
/// at position j % 64, which is little-endian byte order when the words are
/// written little-endian. Padding bits are zero.
template <typename Derived>
std::vector<std::uint64_t> pack_code(const Eigen::DenseBase<Derived>& code) {
  const auto k = static_cast<std::size_t>(code.size());
  std::vector<std::uint64_t> words(words_for(k), 0);
  for (std::size_t j = 0; j < k; ++j) {
    if (code(static_cast<Eigen::Index>(j)) > 0) words[j / 64] |= std::uint64_t{1} << (j % 64);
  }
  return words;
}

/// Inverse of pack_code: a ±1 vector of length k.
Eigen::VectorXi unpack_code(std::span<const std::uint64_t> words, std::size_t k);

/// Number of differing bits between two packed k-bit codes.
int hamming(std::span<const std::uint64_t> a, std::span<const std::uint64_t> b, std::size_t k);

/// Immutable-after-build table of packed codes keyed by item id.
class CodeStore {
 public:
  explicit CodeStore(std::size_t k = 1);

  /// Rows of `codes` are ±1 codes (any positive entry packs to bit 1).
  template <typename Derived>
  static CodeStore from_codes(const std::vector<std::string>& ids, const Eigen::MatrixBase<Derived>& codes) {
    if (static_cast<Eigen::Index>(ids.size()) != codes.rows()) {
      throw std::invalid_argument("code store: id count does not match code rows");
    }
    CodeStore store(static_cast<std::size_t>(codes.cols()));
    for (std::size_t i = 0; i < ids.size(); ++i) {
      store.add(ids[i], pack_code(codes.row(static_cast<Eigen::Index>(i))));
    }
    return store;
  }

  void add(std::string id, std::span<const std::uint64_t> packed);

  std::size_t code_length() const { return k_; }
  std::size_t size() const { return ids_.size(); }
  std::size_t words_per_row() const { return words_per_row_; }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::vector<std::uint64_t>& words() const { return words_; }

  std::span<const std::uint64_t> row(std::size_t i) const {
    return {words_.data() + i * words_per_row_, words_per_row_};
  }
  Eigen::VectorXi code(std::size_t i) const { return unpack_code(row(i), k_); }

  bool contains(const std::string& id) const { return index_.count(id) != 0; }
  std::size_t index_of(const std::string& id) const;

  friend bool operator==(const CodeStore& a, const CodeStore& b) {
    return a.k_ == b.k_ && a.ids_ == b.ids_ && a.words_ == b.words_;
  }

 private:
  std::size_t k_;
  std::size_t words_per_row_;
  std::vector<std::string> ids_;
  std::vector<std::uint64_t> words_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct RankedEntry {
  std::string item_id;
  std::size_t index = 0;  // insertion index in the store
  int distance = 0;
};

struct RankedList {
  std::string query_id;
  std::size_t cutoff = 0;
  std::vector<RankedEntry> entries;
};

/// Exact top-n by (Hamming distance, insertion index). When `exclude_id` names a
/// stored item, that item is skipped.
RankedList search(const CodeStore& store, std::span<const std::uint64_t> query, std::size_t top_n,
                  const std::optional<std::string>& exclude_id = std::nullopt);

/// Random-hyperplane baseline: bit j of item i is sgn(<r_j, x_i>), r_j ~ N(0, I),
/// with sgn(0) = -1.
class LshEncoder {
 public:
  LshEncoder(Eigen::Index input_dim, std::size_t k, std::uint64_t seed);

  const Eigen::MatrixXd& hyperplanes() const { return hyperplanes_; }
  CodeStore encode(const FeatureMatrix& features) const;

 private:
  Eigen::MatrixXd hyperplanes_;  // k x d
};

CodeStore lsh_encode(const FeatureMatrix& features, std::size_t k, std::uint64_t seed);

}  // namespace pseudohash

#endif  // PSEUDOHASH_RETRIEVAL_HPP
