#ifndef PSEUDOHASH_OBJECTIVE_HPP
#define PSEUDOHASH_OBJECTIVE_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pseudohash/hashnet.hpp"

namespace pseudohash {

struct LossConfig {
  double alpha = 2.0;
  double beta = 100.0;

  void validate() const {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must be nonnegative");
    if (!(beta >= 0.0) || !std::isfinite(beta)) throw std::invalid_argument("beta must be nonnegative");
  }
};

/// One pair of batch rows with its similarity s and indicator (1 iff s is 0 or 1).
struct PairTerm {
  Eigen::Index i = 0;
  Eigen::Index j = 0;
  double s = 0.0;
  int indicator = 1;
};

using PairBatch = std::vector<PairTerm>;

template <typename Scalar>
struct LossBreakdown {
  Scalar pair = 0;
  Scalar quant = 0;
  Scalar total = 0;
};

namespace detail {

inline void check_pair(double s, int indicator) {
  if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("pair similarity outside [0,1]");
  if (indicator != 0 && indicator != 1) throw std::invalid_argument("pair indicator must be 0 or 1");
  const bool extreme = s == 0.0 || s == 1.0;
  if (extreme != (indicator == 1)) {
    throw std::invalid_argument("inconsistent pair: s=" + std::to_string(s) +
                                " with indicator=" + std::to_string(indicator));
  }
}

template <typename Scalar>
Scalar softplus(Scalar t) {
  using std::abs, std::exp, std::log1p, std::max;
  return max(t, Scalar(0)) + log1p(exp(-abs(t)));
}

template <typename Scalar>
Scalar sigmoid(Scalar t) {
  using std::exp;
  if (t >= Scalar(0)) return Scalar(1) / (Scalar(1) + exp(-t));
  const Scalar e = exp(t);
  return e / (Scalar(1) + e);
}

template <typename Scalar>
void check_batch(const Matrix<Scalar>& u, const Matrix<Scalar>& codes, const PairBatch& pairs) {
  if (u.rows() != codes.rows() || u.cols() != codes.cols()) {
    throw std::invalid_argument("loss: outputs and codes differ in shape");
  }
  for (const auto& p : pairs) {
    if (p.i < 0 || p.j < 0 || p.i >= u.rows() || p.j >= u.rows()) {
      throw std::out_of_range("loss: pair index outside the batch");
    }
    if (p.i == p.j) throw std::invalid_argument("loss: pair joins an item with itself");
    check_pair(p.s, p.indicator);
  }
}

/// d(pair_loss)/d(theta) for theta = 0.5 * u_i . u_j.
template <typename Scalar>
Scalar pair_loss_slope(Scalar theta, double s, int indicator, double alpha) {
  const Scalar sig = sigmoid(theta);
  if (indicator == 1) return Scalar(alpha) * (sig - Scalar(s));
  return Scalar(-2) * (Scalar(s) - sig) * sig * (Scalar(1) - sig);
}

}  // namespace detail

/// Pairwise term: alpha * (log(1 + e^theta) - s * theta) when indicator is 1,
/// (s - sigmoid(theta))^2 otherwise, with theta = 0.5 * u_i . u_j.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar pair_loss(const Eigen::MatrixBase<DerivedA>& u_i, const Eigen::MatrixBase<DerivedB>& u_j,
                                    double s, int indicator, double alpha) {
  using Scalar = typename DerivedA::Scalar;
  if (u_i.size() != u_j.size()) throw std::invalid_argument("pair_loss: code lengths differ");
  detail::check_pair(s, indicator);
  const Scalar theta = Scalar(0.5) * u_i.reshaped().dot(u_j.reshaped().template cast<Scalar>());
  if (indicator == 1) return Scalar(alpha) * (detail::softplus(theta) - Scalar(s) * theta);
  const Scalar diff = Scalar(s) - detail::sigmoid(theta);
  return diff * diff;
}

/// Squared distance between the real-valued output and its code.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar quant_loss(const Eigen::MatrixBase<DerivedA>& u, const Eigen::MatrixBase<DerivedB>& b) {
  if (u.size() != b.size()) throw std::invalid_argument("quant_loss: lengths differ");
  return (u.reshaped() - b.reshaped().template cast<typename DerivedA::Scalar>()).squaredNorm();
}

/// Sum of pair terms plus beta times the summed quantization loss. Rows of
/// `u` and `codes` are batch items.
template <typename Scalar>
LossBreakdown<Scalar> total_loss(const Matrix<Scalar>& u, const Matrix<Scalar>& codes, const PairBatch& pairs,
                                 const LossConfig& cfg) {
  cfg.validate();
  detail::check_batch(u, codes, pairs);
  LossBreakdown<Scalar> out;
  for (const auto& p : pairs) {
    out.pair += pair_loss(u.row(p.i), u.row(p.j), p.s, p.indicator, cfg.alpha);
  }
  out.quant = (u - codes).squaredNorm();
  out.total = out.pair + Scalar(cfg.beta) * out.quant;
  return out;
}

/// Exact gradient of total_loss with respect to u, codes held constant.
///
/// Each pair contributes slope * 0.5 * u_j to row i and slope * 0.5 * u_i to row j.
/// For the squared-error branch the slope is -2 (s - sigmoid) sigmoid (1 - sigmoid).
template <typename Scalar>
Matrix<Scalar> grad_u(const Matrix<Scalar>& u, const Matrix<Scalar>& codes, const PairBatch& pairs,
                      const LossConfig& cfg) {
  cfg.validate();
  detail::check_batch(u, codes, pairs);
  Matrix<Scalar> grad = Scalar(2 * cfg.beta) * (u - codes);
  for (const auto& p : pairs) {
    const Scalar theta = Scalar(0.5) * u.row(p.i).dot(u.row(p.j));
    const Scalar half_slope = Scalar(0.5) * detail::pair_loss_slope(theta, p.s, p.indicator, cfg.alpha);
    if (p.i == p.j) {
      grad.row(p.i) += Scalar(2) * half_slope * u.row(p.i);
      continue;
    }
    grad.row(p.i) += half_slope * u.row(p.j);
    grad.row(p.j) += half_slope * u.row(p.i);
  }
  return grad;
}

}  // namespace pseudohash

#endif  // PSEUDOHASH_OBJECTIVE_HPP
