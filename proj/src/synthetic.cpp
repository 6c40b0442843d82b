#include "pseudohash/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <stdexcept>

namespace pseudohash {

SyntheticData make_synthetic(const SyntheticSpec& spec) {
  if (spec.items < 1 || spec.classes < 1 || spec.dim < 1) throw std::invalid_argument("synthetic: empty dimensions");
  if (!(spec.multi_label_fraction >= 0.0 && spec.multi_label_fraction <= 1.0)) {
    throw std::invalid_argument("synthetic: multi_label_fraction must lie in [0,1]");
  }
  if (spec.classes < 2 && spec.multi_label_fraction > 0.0) {
    throw std::invalid_argument("synthetic: two-label items need at least two classes");
  }

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick_class(0, spec.classes - 1);

  const auto c = static_cast<Eigen::Index>(spec.classes);
  Eigen::MatrixXd centers(c, spec.dim);
  for (Eigen::Index i = 0; i < c; ++i) {
    for (Eigen::Index t = 0; t < spec.dim; ++t) centers(i, t) = spec.center_scale * normal(rng);
  }

  const auto n = static_cast<Eigen::Index>(spec.items);
  const auto multi = static_cast<std::size_t>(std::llround(spec.multi_label_fraction * static_cast<double>(spec.items)));
  std::vector<std::size_t> order(spec.items);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<bool> two_labels(spec.items, false);
  for (std::size_t m = 0; m < multi; ++m) two_labels[order[m]] = true;

  LabelBits bits = LabelBits::Zero(n, c);
  Eigen::MatrixXd values(n, spec.dim);
  std::vector<std::string> ids;
  ids.reserve(spec.items);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto first = static_cast<Eigen::Index>(pick_class(rng));
    bits(i, first) = 1;
    Eigen::RowVectorXd mean = centers.row(first);
    if (two_labels[static_cast<std::size_t>(i)]) {
      auto second = first;
      while (second == first) second = static_cast<Eigen::Index>(pick_class(rng));
      bits(i, second) = 1;
      mean = 0.5 * (centers.row(first) + centers.row(second));
    }
    for (Eigen::Index t = 0; t < spec.dim; ++t) values(i, t) = mean(t) + spec.noise * normal(rng);
    char name[32];
    std::snprintf(name, sizeof name, "item%05lld", static_cast<long long>(i));
    ids.emplace_back(name);
  }
  if (spec.center) values.rowwise() -= values.colwise().mean();
  return {FeatureMatrix(ids, std::move(values)), LabelMatrix(ids, std::move(bits))};
}

}  // namespace pseudohash
