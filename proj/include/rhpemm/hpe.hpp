#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "rhpemm/types.hpp"

namespace rhpemm {

// One relaxed hybrid proximal extragradient iteration: at z_prev, the inexact
// proximal triple (z_tilde, v, eps) with stepsize lambda passed the relative
// error condition, and the anchor moved to z_next = z_prev - tau lambda v.
struct HpeRecord {
  long index = 0;          // 1-based position in the extragradient subsequence
  double lambda = 0.0;
  double tau = 0.0;
  PrimalDual z_tilde;
  SaddleValue v;
  double eps = 0.0;
  PrimalDual z_prev;
  PrimalDual z_next;
};

struct SigmaInequality {
  bool holds = false;
  double lhs = 0.0;   // ||lambda v + z_tilde - z_prev||^2 + 2 lambda eps
  double rhs = 0.0;   // sigma^2 ||z_tilde - z_prev||^2
};

// Relative error condition of the relaxed HPE scheme.
inline SigmaInequality check_sigma_inequality(const HpeRecord& r, double sigma) {
  if (!(sigma >= 0.0 && sigma < 1.0))
    throw std::invalid_argument("check_sigma_inequality: sigma must be in [0, 1)");
  PrimalDual diff = r.z_tilde - r.z_prev;
  Vec rp = r.lambda * r.v.primal + diff.x;
  Vec rd = r.lambda * r.v.dual + diff.y;
  SigmaInequality out;
  out.lhs = rp.squaredNorm() + rd.squaredNorm() + 2.0 * r.lambda * r.eps;
  out.rhs = sigma * sigma * diff.squared_norm();
  out.holds = out.lhs <= out.rhs;
  return out;
}

// Ergodic means over the extragradient subsequence with weights tau lambda_j:
//   z_a = sum w_j z_tilde_j / W,  v_a = sum w_j v_j / W,
//   eps_a = sum w_j (eps_j + <z_tilde_j - z_a, v_j - v_a>) / W.
// The accumulator keeps O(n + m) state; the correction term is recovered from
// the inner-product expansion
//   sum w_j <z_tilde_j - z_a, v_j - v_a> = sum w_j <z_tilde_j, v_j> - W <z_a, v_a>.
struct ErgodicState {
  double weight_sum = 0.0;   // W = sum tau lambda_j
  long count = 0;
  PrimalDual z_a;
  SaddleValue v_a;
  double eps_a = 0.0;
};

class ErgodicAccumulator {
 public:
  void add(const HpeRecord& r) {
    const double w = r.tau * r.lambda;
    if (!(w > 0.0)) throw std::invalid_argument("ergodic update: tau lambda must be positive");
    if (count_ == 0) {
      sum_z_ = w * r.z_tilde;
      sum_v_ = w * r.v;
    } else {
      sum_z_ = sum_z_ + w * r.z_tilde;
      sum_v_ = sum_v_ + w * r.v;
    }
    weight_sum_ += w;
    sum_eps_ += w * r.eps;
    sum_zv_ += w * dot(r.z_tilde, r.v);
    ++count_;
  }

  long count() const { return count_; }

  ErgodicState finalize() const {
    if (count_ == 0) throw std::logic_error("ergodic finalize: no records");
    ErgodicState out;
    out.weight_sum = weight_sum_;
    out.count = count_;
    out.z_a = (1.0 / weight_sum_) * sum_z_;
    out.v_a = (1.0 / weight_sum_) * sum_v_;
    out.eps_a =
        (sum_eps_ + sum_zv_ - weight_sum_ * dot(out.z_a, out.v_a)) / weight_sum_;
    return out;
  }

 private:
  long count_ = 0;
  double weight_sum_ = 0.0;
  PrimalDual sum_z_;
  SaddleValue sum_v_;
  double sum_eps_ = 0.0;
  double sum_zv_ = 0.0;
};

// Worst-case residual decay of the relaxed HPE scheme after i extragradient
// iterations, given the distance d0 from the start to the solution set and a
// uniform lower bound eta <= lambda_j ||z_tilde_j - z_{j-1}||:
//   pointwise: some j <= i has ||v_j|| and eps_j below these bounds;
//   ergodic:   the means after i iterations are below these bounds.
struct RateBounds {
  double pointwise_v = 0.0;
  double pointwise_eps = 0.0;
  double ergodic_v = 0.0;
  double ergodic_eps = 0.0;
};

inline RateBounds abstract_rate_bounds(double d0, double sigma, double tau,
                                       double eta, long i) {
  if (!(d0 >= 0) || !(sigma >= 0 && sigma < 1) || !(tau > 0 && tau <= 1) ||
      !(eta > 0) || i < 1)
    throw std::invalid_argument("abstract_rate_bounds: invalid argument");
  const double it = static_cast<double>(i) * tau;
  const double om2 = 1.0 - sigma * sigma;
  RateBounds out;
  out.pointwise_v = d0 * d0 / (it * (1.0 - sigma) * eta);
  out.pointwise_eps =
      sigma * sigma * d0 * d0 * d0 / (std::pow(it, 1.5) * std::pow(om2, 1.5) * 2.0 * eta);
  out.ergodic_v = 2.0 * d0 * d0 / (std::pow(it, 1.5) * std::sqrt(om2) * eta);
  out.ergodic_eps = 2.0 * d0 * d0 * d0 / (std::pow(it, 1.5) * om2 * eta);
  return out;
}

// Least-squares slope of log(values[i]) against log(i) over 1-based indices
// in [i_lo, i_hi]; nonpositive values are skipped.
inline double fit_loglog_slope(const std::vector<double>& values, long i_lo, long i_hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  long n = 0;
  for (long i = i_lo; i <= i_hi && i <= static_cast<long>(values.size()); ++i) {
    double v = values[static_cast<size_t>(i - 1)];
    if (!(v > 0.0)) continue;
    double lx = std::log(static_cast<double>(i));
    double ly = std::log(v);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) throw std::invalid_argument("fit_loglog_slope: fewer than two usable points");
  double denom = n * sxx - sx * sx;
  return (n * sxy - sx * sy) / denom;
}

}  // namespace rhpemm
