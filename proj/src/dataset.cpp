#include "pseudohash/dataset.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

#include "pseudohash/labelspace.hpp"

namespace pseudohash {

FeatureMatrix::FeatureMatrix(std::vector<std::string> ids, Eigen::MatrixXd values)
    : ids_(std::move(ids)), values_(std::move(values)) {
  if (static_cast<Eigen::Index>(ids_.size()) != values_.rows()) {
    throw std::invalid_argument("feature matrix: id count does not match row count");
  }
  for (std::size_t i = 0; i < ids_.size(); ++i) {
    if (!index_.emplace(ids_[i], i).second) throw InputError("duplicate item_id '" + ids_[i] + "'");
  }
}

std::size_t FeatureMatrix::index_of(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw InputError("no feature row for item '" + id + "'");
  return it->second;
}

FeatureMatrix FeatureMatrix::rows(const std::vector<std::size_t>& indices) const {
  std::vector<std::string> ids;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(indices.size()), values_.cols());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    if (indices[r] >= size()) throw std::out_of_range("feature row index out of range");
    ids.push_back(ids_[indices[r]]);
    out.row(static_cast<Eigen::Index>(r)) = values_.row(static_cast<Eigen::Index>(indices[r]));
  }
  return FeatureMatrix(std::move(ids), std::move(out));
}

FeatureMatrix FeatureMatrix::select(const std::vector<std::string>& ids) const {
  std::vector<std::size_t> indices;
  indices.reserve(ids.size());
  for (const auto& id : ids) indices.push_back(index_of(id));
  return rows(indices);
}

Split split_indices(std::size_t n, std::size_t test_size, std::uint64_t seed) {
  if (test_size > n) throw std::invalid_argument("test split larger than the dataset");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  Split split;
  split.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(test_size));
  split.train.assign(order.begin() + static_cast<std::ptrdiff_t>(test_size), order.end());
  std::sort(split.test.begin(), split.test.end());
  std::sort(split.train.begin(), split.train.end());
  return split;
}

}  // namespace pseudohash
