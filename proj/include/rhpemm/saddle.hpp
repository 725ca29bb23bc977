#pragma once

#include <random>
#include <vector>

#include "rhpemm/problem.hpp"

namespace rhpemm {

// Lagrangian L(x, y) = f(x) + <y, g(x)> (no sign restriction on y here).
inline double lagrangian(const ConvexProgram& prog, const PrimalDual& z) {
  prog.check_point(z);
  return prog.f(z.x).value + z.y.dot(prog.g(z.x).value);
}

// Extended Lagrangian: equals L(x, y) for y >= 0 and -infinity otherwise,
// making it concave in y over all of R^m. The -infinity branch is a tag.
inline ExtendedReal extended_lagrangian(const ConvexProgram& prog, const PrimalDual& z) {
  prog.check_point(z);
  if ((z.y.array() < 0.0).any()) return ExtendedReal::minus_infinity();
  return ExtendedReal::of(lagrangian(prog, z));
}

// Saddle operator S(z) = (grad f(x) + grad g(x) y, -g(x)).
inline SaddleValue saddle_operator(const ConvexProgram& prog, const PrimalDual& z) {
  prog.check_point(z);
  FEval fe = prog.f(z.x);
  GEval ge = prog.g(z.x);
  return {fe.grad + ge.jacobian_t * z.y, -ge.value};
}

// Sample points around z_tilde for evidence checks: uniform box samples plus
// directed samples along +-S(z_tilde), dual blocks clamped to stay >= 0.
inline std::vector<PrimalDual> saddle_point_samples(const ConvexProgram& prog,
                                                    const PrimalDual& z_tilde,
                                                    std::mt19937_64& rng,
                                                    int count = 64,
                                                    double radius = 1.0) {
  prog.check_point(z_tilde);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  SaddleValue s = saddle_operator(prog, z_tilde);
  double sn = s.norm();
  std::vector<PrimalDual> samples;
  samples.reserve(static_cast<size_t>(count));
  for (int k = 0; k < count; ++k) {
    PrimalDual p;
    if (k < 8 && sn > 0) {
      // alternate +-S(z_tilde) at a few scales
      double scale = radius * ((k / 2) + 1) / (4.0 * sn) * ((k % 2) ? -1.0 : 1.0);
      p.x = z_tilde.x + scale * s.primal;
      p.y = pos_part(z_tilde.y + scale * s.dual);
    } else {
      p.x.resize(prog.n);
      p.y.resize(prog.m);
      for (Eigen::Index i = 0; i < prog.n; ++i) p.x[i] = z_tilde.x[i] + radius * unif(rng);
      for (Eigen::Index i = 0; i < prog.m; ++i)
        p.y[i] = std::max(0.0, z_tilde.y[i] + radius * unif(rng));
    }
    samples.push_back(std::move(p));
  }
  return samples;
}

// Evidence check for v = (p, q) being an eps-subgradient of the convex-concave
// pair at z_tilde = (x_tilde, y_tilde) with y_tilde >= 0: for every sample
// (x, y) with y >= 0,
//   L(x, y_tilde) - L(x_tilde, y) >= <p, x - x_tilde> + <q, y - y_tilde> - eps.
// Returns false only on a violation beyond a small relative slack, so a false
// result is a definitive counterexample while true is necessary evidence.
inline bool eps_saddle_subgradient_check(const ConvexProgram& prog,
                                         const PrimalDual& z_tilde,
                                         const SaddleValue& v, double eps,
                                         const std::vector<PrimalDual>& samples,
                                         double tol = 1e-9) {
  prog.check_point(z_tilde);
  if ((z_tilde.y.array() < 0.0).any())
    throw std::invalid_argument("eps_saddle_subgradient_check: y_tilde must be >= 0");
  if (eps < 0)
    throw std::invalid_argument("eps_saddle_subgradient_check: eps must be >= 0");
  const double f_tilde = prog.f(z_tilde.x).value;
  const Vec g_tilde = prog.g(z_tilde.x).value;
  for (const PrimalDual& s : samples) {
    if ((s.y.array() < 0.0).any())
      throw std::invalid_argument("eps_saddle_subgradient_check: samples need y >= 0");
    // L(x, y_tilde) - L(x_tilde, y), both blocks finite since duals are >= 0
    double lhs = prog.f(s.x).value + z_tilde.y.dot(prog.g(s.x).value) -
                 (f_tilde + s.y.dot(g_tilde));
    double rhs = v.primal.dot(s.x - z_tilde.x) + v.dual.dot(s.y - z_tilde.y) - eps;
    double slack = tol * (1.0 + std::abs(lhs) + std::abs(rhs));
    if (lhs < rhs - slack) return false;
  }
  return true;
}

}  // namespace rhpemm
