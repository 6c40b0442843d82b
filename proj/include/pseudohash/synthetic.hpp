#ifndef PSEUDOHASH_SYNTHETIC_HPP
#define PSEUDOHASH_SYNTHETIC_HPP

#include <cstdint>

#include "pseudohash/dataset.hpp"
#include "pseudohash/labelspace.hpp"

namespace pseudohash {

/// Gaussian-cluster benchmark: each item belongs to one latent class, a fixed
/// fraction to two. Features sit at the mean of the member class centers plus
/// isotropic noise; labels are the class memberships.
struct SyntheticSpec {
  std::size_t items = 500;
  std::size_t classes = 5;
  double multi_label_fraction = 0.2;
  Eigen::Index dim = 32;
  double center_scale = 1.0;
  double noise = 1.0;
  /// Subtract the empirical feature mean.
  bool center = true;
  std::uint64_t seed = 7;
};

struct SyntheticData {
  FeatureMatrix features;
  LabelMatrix labels;
};

SyntheticData make_synthetic(const SyntheticSpec& spec);

}  // namespace pseudohash

#endif  // PSEUDOHASH_SYNTHETIC_HPP
