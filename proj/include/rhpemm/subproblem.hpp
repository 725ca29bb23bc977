#pragma once

#include <cmath>
#include <stdexcept>

#include "rhpemm/reference.hpp"

namespace rhpemm {

class SubproblemFailure : public std::runtime_error {
 public:
  SubproblemFailure(const std::string& what, double residual)
      : std::runtime_error(what), best_residual(residual) {}
  double best_residual;
};

struct SubproblemSolution {
  PrimalDual z;                // (x, y) with y = (lambda g_m(x) + ybar)_+ >= 0 exactly
  double residual_norm = 0.0;  // ||F(x)|| at the returned x
  int newton_iters = 0;
  bool fallback_used = false;
};

struct SubproblemOptions {
  int max_newton = 200;
  int max_backtracks = 30;
};

namespace detail {

struct ReducedEval {
  Vec residual;   // F(x)
  Vec gvals;      // model constraint values
  Mat jac_t;      // model constraint gradients (columns)
  Vec u;          // lambda gvals + ybar
  Vec y;          // u_+
  double norm = 0.0;
};

// F(x) = lambda (grad f_m(x) + sum_i (lambda g_mi(x) + ybar_i)_+ grad g_mi(x)) + x - xbar.
// Eliminating the dual block via y(x) = (lambda g_m(x) + ybar)_+ reduces the
// strongly monotone model saddle inclusion to F(x) = 0, and the model error
// measure at (x, y(x)) equals ||F(x)||^2 exactly, so driving ||F|| below the
// inner tolerance certifies the solve.
inline ReducedEval reduced_residual(const QuadraticModel& model, const PrimalDual& zbar,
                                    double lambda, const Vec& x) {
  const Eigen::Index n = model.n(), m = model.m();
  ReducedEval e;
  Vec d = x - model.x_tilde;
  Vec grad = model.f.grad_at(d);
  e.gvals.resize(m);
  e.jac_t.resize(n, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const QuadTerm& gi = model.g[static_cast<size_t>(i)];
    e.gvals[i] = gi.value_at(d);
    e.jac_t.col(i) = gi.grad_at(d);
  }
  e.u = lambda * e.gvals + zbar.y;
  e.y = pos_part(e.u);
  e.residual = lambda * (grad + e.jac_t * e.y) + x - zbar.x;
  e.norm = e.residual.norm();
  return e;
}

}  // namespace detail

// Solves the proximal saddle subproblem on the quadratic model: find (x, y)
// with y = (lambda g_m(x) + ybar)_+ and F(x) = 0, by a damped semismooth
// Newton method on F. The generalized Jacobian
//   J(x) = I + lambda (H_f + sum_i y_i(x) H_i) + lambda^2 Jac_act Jac_act'
// is symmetric positive definite (selecting the inactive branch at kinks,
// where u_i = 0), so Newton directions come from a Cholesky solve. Steps are
// halved until ||F|| decreases; on stagnation the globally convergent damped
// fixed-point reference takes over from the best iterate.
inline SubproblemSolution solve_model_saddle(const QuadraticModel& model,
                                             const PrimalDual& zbar, double lambda,
                                             double inner_tol,
                                             const Vec* warm_start = nullptr,
                                             const SubproblemOptions& opts = {}) {
  if (!(lambda > 0.0))
    throw std::invalid_argument("solve_model_saddle: lambda must be positive");
  if (!(inner_tol > 0.0))
    throw std::invalid_argument("solve_model_saddle: inner_tol must be positive");
  const Eigen::Index n = model.n(), m = model.m();
  if (zbar.x.size() != n || zbar.y.size() != m)
    throw std::invalid_argument("solve_model_saddle: zbar has wrong block dimensions");

  Vec x = warm_start ? *warm_start : zbar.x;
  if (x.size() != n)
    throw std::invalid_argument("solve_model_saddle: warm start has wrong dimension");

  SubproblemSolution out;
  detail::ReducedEval e = detail::reduced_residual(model, zbar, lambda, x);
  Vec best_x = x;
  double best_norm = e.norm;

  bool stagnated = false;
  while (e.norm > inner_tol && out.newton_iters < opts.max_newton) {
    Mat jac = Mat::Identity(n, n) + lambda * model.f.hess;
    for (Eigen::Index i = 0; i < m; ++i) {
      if (e.y[i] > 0.0)
        jac += (lambda * e.y[i]) * model.g[static_cast<size_t>(i)].hess;
      if (e.u[i] > 0.0)
        jac += (lambda * lambda) * (e.jac_t.col(i) * e.jac_t.col(i).transpose());
    }
    Eigen::LLT<Mat> llt(jac);
    if (llt.info() != Eigen::Success) {
      stagnated = true;
      break;
    }
    Vec step = llt.solve(-e.residual);

    double t = 1.0;
    bool accepted = false;
    for (int bt = 0; bt < opts.max_backtracks; ++bt) {
      detail::ReducedEval trial = detail::reduced_residual(model, zbar, lambda, x + t * step);
      if (trial.norm <= (1.0 - 1e-4 * t) * e.norm) {
        x += t * step;
        e = std::move(trial);
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    ++out.newton_iters;
    if (e.norm < best_norm) {
      best_norm = e.norm;
      best_x = x;
    }
    if (!accepted) {
      stagnated = true;
      break;
    }
  }

  if (e.norm > inner_tol) {
    // Newton stagnated or ran out of budget: fall back to the reference
    // scheme warm-started at the best iterate seen.
    (void)stagnated;
    out.fallback_used = true;
    PrimalDual ref;
    try {
      ref = reference_subproblem(model, zbar, lambda, inner_tol, &best_x);
    } catch (const ReferenceFailure& f) {
      throw SubproblemFailure("model subproblem did not reach the inner tolerance",
                              std::min(best_norm, f.best_residual));
    }
    e = detail::reduced_residual(model, zbar, lambda, ref.x);
    x = ref.x;
  }

  out.z = {x, e.y};
  out.residual_norm = e.norm;
  return out;
}

}  // namespace rhpemm
