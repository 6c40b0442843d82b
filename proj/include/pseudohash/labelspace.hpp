#ifndef PSEUDOHASH_LABELSPACE_HPP
#define PSEUDOHASH_LABELSPACE_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace pseudohash {

/// Error raised for malformed inputs, with the offending location in what().
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Row-major n x c matrix of 0/1 label bits.
using LabelBits = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Binary pseudo-label vectors keyed by item id.
///
/// Items whose label vector is all zero are kept; `unlabeled_items()` lists
/// them so callers can report them.
class LabelMatrix {
 public:
  LabelMatrix() = default;
  LabelMatrix(std::vector<std::string> ids, LabelBits bits);

  std::size_t size() const { return ids_.size(); }
  std::size_t num_classes() const { return static_cast<std::size_t>(bits_.cols()); }

  const std::vector<std::string>& ids() const { return ids_; }
  const LabelBits& bits() const { return bits_; }
  std::span<const std::uint8_t> row(std::size_t i) const {
    return {bits_.data() + i * num_classes(), num_classes()};
  }

  /// Row index of `id`; throws InputError when absent.
  std::size_t index_of(const std::string& id) const;
  bool contains(const std::string& id) const { return index_.count(id) != 0; }

  std::vector<std::size_t> unlabeled_items() const;

  /// Rows reordered to follow `ids`. Throws when an id is missing.
  LabelMatrix select(const std::vector<std::string>& ids) const;

  friend bool operator==(const LabelMatrix& a, const LabelMatrix& b) {
    return a.ids_ == b.ids_ && a.bits_ == b.bits_;
  }

 private:
  std::vector<std::string> ids_;
  LabelBits bits_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Dense pairwise similarity and the exact-match indicator.
struct SimilarityMatrix {
  Eigen::MatrixXd s;
  Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic> indicator;

  std::size_t size() const { return static_cast<std::size_t>(s.rows()); }
};

/// Cosine similarity of two binary label vectors. Returns 0 when either
/// vector is all zero.
double similarity(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);

/// 1 when the label sets are disjoint or identical, else 0. Computed from
/// integer counts only.
int indicator(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);

SimilarityMatrix build_similarity(const LabelMatrix& labels);

std::vector<std::string> read_class_map(const std::filesystem::path& path);

/// Parses line-delimited detection records of the form
/// {"item_id": "...", "detections": [{"class_name": "...", "score": 0.9}, ...]}.
/// A class bit is set when any detection of that class reaches `confidence_threshold`.
LabelMatrix ingest_detections(std::istream& in, double confidence_threshold,
                              const std::vector<std::string>& class_map);
LabelMatrix ingest_detections(const std::filesystem::path& path, double confidence_threshold,
                              const std::vector<std::string>& class_map);

/// Text export: "c=<int> n=<int>" header, then "item_id 0101..." per item.
void write_labels(std::ostream& out, const LabelMatrix& labels);
void write_labels(const std::filesystem::path& path, const LabelMatrix& labels);
LabelMatrix read_labels(std::istream& in);
LabelMatrix read_labels(const std::filesystem::path& path);

}  // namespace pseudohash

#endif  // PSEUDOHASH_LABELSPACE_HPP
