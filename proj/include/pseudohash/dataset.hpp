#ifndef PSEUDOHASH_DATASET_HPP
#define PSEUDOHASH_DATASET_HPP

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace pseudohash {

/// Precomputed feature vectors, one row per item.
class FeatureMatrix {
 public:
  FeatureMatrix() = default;
  FeatureMatrix(std::vector<std::string> ids, Eigen::MatrixXd values);

  std::size_t size() const { return ids_.size(); }
  Eigen::Index dim() const { return values_.cols(); }
  const std::vector<std::string>& ids() const { return ids_; }
  const Eigen::MatrixXd& values() const { return values_; }

  std::size_t index_of(const std::string& id) const;
  bool contains(const std::string& id) const { return index_.count(id) != 0; }

  FeatureMatrix rows(const std::vector<std::size_t>& indices) const;
  FeatureMatrix select(const std::vector<std::string>& ids) const;

  friend bool operator==(const FeatureMatrix& a, const FeatureMatrix& b) {
    return a.ids_ == b.ids_ && a.values_.rows() == b.values_.rows() && a.values_.cols() == b.values_.cols() &&
           a.values_ == b.values_;
  }

 private:
  std::vector<std::string> ids_;
  Eigen::MatrixXd values_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Seeded shuffle of 0..n-1; the first `test_size` indices form the test set.
/// Both halves are returned in ascending order.
Split split_indices(std::size_t n, std::size_t test_size, std::uint64_t seed);

}  // namespace pseudohash

#endif  // PSEUDOHASH_DATASET_HPP
