#pragma once

#include <cassert>
#include <cmath>

#include "rhpemm/quad_model.hpp"
#include "rhpemm/saddle.hpp"

namespace rhpemm {

// Decomposed evaluation of the proximal error measure
//   Psi(z) = min_{w >= 0} ||lambda (S(z) - (0, w)) + z - zbar||^2 + 2 lambda <y, w>
// at z = (x, y) with y >= 0, anchor zbar = (xbar, ybar) and stepsize lambda > 0.
// The minimizer is w = (g(x) + ybar/lambda)_- and the minimum has two closed
// forms; `psi` carries the three-term form (numerically preferred), `psi_alt`
// the subtractive form, and both are asserted to agree in debug builds.
struct PsiEvaluation {
  double psi = 0.0;       // ||lambda gradL_x + x - xbar||^2 + ||y - u_+||^2 + 2 <y, u_->
  double psi_alt = 0.0;   // ||lambda S(z) + z - zbar||^2 - ||u_-||^2
  Vec w;                  // argmin, = u_- / lambda with u = lambda g + ybar
  SaddleValue v;          // S(z) - (0, w)
  double eps = 0.0;       // <y, w> >= 0
  SaddleValue residual;   // lambda v + z - zbar; psi = ||residual||^2 + 2 lambda eps
};

namespace detail {

inline void check_psi_args(const PrimalDual& z, const PrimalDual& zbar, double lambda) {
  if (!(lambda > 0.0))
    throw std::invalid_argument("psi: lambda must be positive");
  if ((z.y.array() < 0.0).any())
    throw std::invalid_argument("psi: y must be componentwise nonnegative");
  if (z.x.size() != zbar.x.size() || z.y.size() != zbar.y.size())
    throw std::invalid_argument("psi: z and zbar have mismatched blocks");
}

}  // namespace detail

// Core evaluation given Sz = S(z). Works for the true saddle operator and for
// model operators alike; everything needed is recoverable from Sz (the dual
// block is -g(x)).
inline PsiEvaluation psi_from_saddle(const SaddleValue& Sz, const PrimalDual& z,
                                     const PrimalDual& zbar, double lambda) {
  detail::check_psi_args(z, zbar, lambda);
  const Vec g = -Sz.dual;
  // u = lambda g + ybar; the lambda-scaled split keeps u_+ - u_- = u exact.
  const Vec u = lambda * g + zbar.y;
  const Vec u_plus = pos_part(u);
  const Vec u_minus = neg_part(u);

  PsiEvaluation out;
  out.w = u_minus / lambda;
  out.v = {Sz.primal, Sz.dual - out.w};
  out.eps = z.y.dot(out.w);
  out.residual = {lambda * out.v.primal + z.x - zbar.x,
                  lambda * out.v.dual + z.y - zbar.y};

  const double primal_sq = (lambda * Sz.primal + z.x - zbar.x).squaredNorm();
  out.psi = primal_sq + (z.y - u_plus).squaredNorm() + 2.0 * z.y.dot(u_minus);
  out.psi_alt = primal_sq + (lambda * Sz.dual + z.y - zbar.y).squaredNorm() -
                u_minus.squaredNorm();
  assert(std::abs(out.psi - out.psi_alt) <=
         1e-10 * (1.0 + std::abs(out.psi) + std::abs(out.psi_alt)));
  return out;
}

inline PsiEvaluation psi(const ConvexProgram& prog, const PrimalDual& z,
                         const PrimalDual& zbar, double lambda) {
  return psi_from_saddle(saddle_operator(prog, z), z, zbar, lambda);
}

inline PsiEvaluation psi_model(const QuadraticModel& model, const PrimalDual& z,
                               const PrimalDual& zbar, double lambda) {
  return psi_from_saddle(model_saddle_operator(model, z), z, zbar, lambda);
}

// Minimizing w in the definition of Psi: componentwise max(-(g(x) + ybar/lambda), 0).
inline Vec optimal_w(const ConvexProgram& prog, const PrimalDual& z,
                     const PrimalDual& zbar, double lambda) {
  detail::check_psi_args(z, zbar, lambda);
  return neg_part(prog.g(z.x).value + zbar.y / lambda);
}

struct InclusionTriple {
  SaddleValue v;   // element of the eps-enlarged operator at z
  double eps;      // enlargement size, = <y, w>
  Vec w;
};

// The triple certified by the error measure: w = (g + ybar/lambda)_-,
// v = S(z) - (0, w), eps = <y, w>, satisfying
// ||lambda v + z - zbar||^2 + 2 lambda eps = Psi(z).
inline InclusionTriple extract_v_eps(const ConvexProgram& prog, const PrimalDual& z,
                                     const PrimalDual& zbar, double lambda) {
  PsiEvaluation pe = psi(prog, z, zbar, lambda);
  return {pe.v, pe.eps, pe.w};
}

// Derivative of lambda -> Psi (piecewise quadratic, convex, differentiable):
// 2 <S(z), lambda (S(z) - (0, w)) + z - zbar>.
inline double psi_lambda_derivative(const ConvexProgram& prog, const PrimalDual& z,
                                    const PrimalDual& zbar, double lambda) {
  SaddleValue s = saddle_operator(prog, z);
  PsiEvaluation pe = psi_from_saddle(s, z, zbar, lambda);
  return 2.0 * dot(s, pe.residual);
}

// Largest root of (a + b rho) rho = alpha with a = (L0 + <Lg, |y|>)/2 and
// b = (2/3)||Lg||, written in the cancellation-free form
// 2 alpha / (a + sqrt(a^2 + 4 b alpha)).
inline double rho_radius_ab(double a, double b, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("rho_radius: alpha must be positive");
  if (a < 0 || b < 0) throw std::invalid_argument("rho_radius: negative coefficient");
  if (a == 0.0 && b == 0.0)
    throw std::invalid_argument("rho_radius: a = b = 0 is degenerate");
  if (b == 0.0) return alpha / a;
  return 2.0 * alpha / (a + std::sqrt(a * a + 4.0 * b * alpha));
}

inline double rho_radius(const ConvexProgram& prog, const Vec& y, double alpha) {
  if (y.size() != prog.m)
    throw std::invalid_argument("rho_radius: y has wrong dimension");
  double a = 0.5 * (prog.L0 + prog.Lg.dot(y.cwiseAbs()));
  double b = 2.0 / 3.0 * prog.Lg.norm();
  return rho_radius_ab(a, b, alpha);
}

// Membership in the localization neighborhood:
// sqrt(Psi_{zbar, lambda}(z)) <= rho(y, theta / lambda), with y >= 0 required.
inline bool neighborhood_contains(const ConvexProgram& prog, const PrimalDual& z,
                                  const PrimalDual& zbar, double lambda, double theta) {
  if (!(theta > 0.0)) throw std::invalid_argument("neighborhood: theta must be positive");
  PsiEvaluation pe = psi(prog, z, zbar, lambda);
  double rho = rho_radius(prog, z.y, theta / lambda);
  return std::sqrt(std::max(0.0, pe.psi)) <= rho;
}

struct AnchorUpdate {
  PrimalDual zbar_new;
  double lambda_new = 0.0;
};

// Relaxed anchor update zbar(tau) = zbar - tau lambda v, lambda(tau) = (1-tau) lambda,
// which never increases Psi evaluated at the same z. The dual block is formed
// as the convex combination (1-tau) ybar + tau (lambda g + ybar)_+ so that a
// nonnegative ybar stays exactly nonnegative in floating point.
inline AnchorUpdate relaxed_anchor_update(const ConvexProgram& prog,
                                          const PrimalDual& z_tilde,
                                          const PrimalDual& zbar, double lambda,
                                          double tau) {
  if (!(lambda > 0.0))
    throw std::invalid_argument("relaxed_anchor_update: lambda must be positive");
  if (!(tau >= 0.0 && tau <= 1.0))
    throw std::invalid_argument("relaxed_anchor_update: tau must lie in [0, 1]");
  SaddleValue s = saddle_operator(prog, z_tilde);
  const Vec u_plus = pos_part(lambda * (-s.dual) + zbar.y);
  AnchorUpdate out;
  out.zbar_new.x = zbar.x - tau * lambda * s.primal;
  out.zbar_new.y = (1.0 - tau) * zbar.y + tau * u_plus;
  out.lambda_new = (1.0 - tau) * lambda;
  return out;
}

}  // namespace rhpemm
