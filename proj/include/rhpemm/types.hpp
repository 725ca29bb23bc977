#pragma once

#include <Eigen/Dense>
#include <cmath>

namespace rhpemm {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Componentwise positive part max(u, 0).
inline Vec pos_part(const Vec& u) { return u.cwiseMax(0.0); }

// Componentwise negative part with the convention (u)_- = max(-u, 0) >= 0,
// so u = (u)_+ - (u)_- and <(u)_+, (u)_-> = 0.
inline Vec neg_part(const Vec& u) { return (-u).cwiseMax(0.0); }

// Primal-dual point z = (x, y) in R^n x R^m.
struct PrimalDual {
  Vec x;
  Vec y;

  Eigen::Index n() const { return x.size(); }
  Eigen::Index m() const { return y.size(); }

  static PrimalDual Zero(Eigen::Index n, Eigen::Index m) {
    return {Vec::Zero(n), Vec::Zero(m)};
  }

  Vec stacked() const {
    Vec z(x.size() + y.size());
    z << x, y;
    return z;
  }
  static PrimalDual unstack(const Vec& z, Eigen::Index n) {
    return {z.head(n), z.tail(z.size() - n)};
  }

  double squared_norm() const { return x.squaredNorm() + y.squaredNorm(); }
  double norm() const { return std::sqrt(squared_norm()); }
};

inline PrimalDual operator+(const PrimalDual& a, const PrimalDual& b) {
  return {a.x + b.x, a.y + b.y};
}
inline PrimalDual operator-(const PrimalDual& a, const PrimalDual& b) {
  return {a.x - b.x, a.y - b.y};
}
inline PrimalDual operator*(double s, const PrimalDual& a) {
  return {s * a.x, s * a.y};
}

// Saddle operator value or any residual with the same block structure:
// a primal block in R^n and a dual block in R^m.
struct SaddleValue {
  Vec primal;
  Vec dual;

  double squared_norm() const { return primal.squaredNorm() + dual.squaredNorm(); }
  double norm() const { return std::sqrt(squared_norm()); }
};

inline SaddleValue operator+(const SaddleValue& a, const SaddleValue& b) {
  return {a.primal + b.primal, a.dual + b.dual};
}
inline SaddleValue operator-(const SaddleValue& a, const SaddleValue& b) {
  return {a.primal - b.primal, a.dual - b.dual};
}
inline SaddleValue operator*(double s, const SaddleValue& a) {
  return {s * a.primal, s * a.dual};
}

inline double dot(const SaddleValue& a, const SaddleValue& b) {
  return a.primal.dot(b.primal) + a.dual.dot(b.dual);
}
inline double dot(const PrimalDual& z, const SaddleValue& v) {
  return z.x.dot(v.primal) + z.y.dot(v.dual);
}
inline double dot(const PrimalDual& a, const PrimalDual& b) {
  return a.x.dot(b.x) + a.y.dot(b.y);
}

// Extended-real value used where the concave extended Lagrangian can be
// -infinity (dual block outside the nonnegative orthant). The sentinel is a
// tag, never an IEEE infinity fed into arithmetic.
struct ExtendedReal {
  bool finite = true;
  double value = 0.0;

  static ExtendedReal minus_infinity() { return {false, 0.0}; }
  static ExtendedReal of(double v) { return {true, v}; }
};

}  // namespace rhpemm
