#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>

#include "rhpemm/error_measure.hpp"
#include "rhpemm/hpe.hpp"
#include "rhpemm/quad_model.hpp"

namespace rhpemm {

// Independent reference implementations used to cross-check the fast paths.
// They share no numerical kernels with the modules they validate: the
// subproblem reference is a plain damped fixed-point iteration, the w oracle
// is a grid search, and the ergodic oracle is a two-pass recomputation.

class ReferenceFailure : public std::runtime_error {
 public:
  ReferenceFailure(const std::string& what, double residual)
      : std::runtime_error(what), best_residual(residual) {}
  double best_residual;
};

// Solves the model proximal saddle subproblem by damped gradient steps on the
// reduced map
//   G(x) = lambda (grad f_m(x) + sum_i (lambda g_mi(x) + ybar_i)_+ grad g_mi(x)) + x - xbar,
// the gradient of a strongly convex function with modulus >= 1 (the identity
// term). Each step uses 1/L with L a certified Lipschitz bound of G over a
// ball around the current iterate that contains the solution (the solution is
// within ||G(x)|| of x by strong monotonicity), so the iteration contracts.
inline PrimalDual reference_subproblem(const QuadraticModel& model,
                                       const PrimalDual& zbar, double lambda,
                                       double tol,
                                       const Vec* warm_start = nullptr,
                                       long max_iters = 2000000) {
  if (!(lambda > 0.0))
    throw std::invalid_argument("reference_subproblem: lambda must be positive");
  if (!(tol > 0.0))
    throw std::invalid_argument("reference_subproblem: tol must be positive");
  const Eigen::Index n = model.n(), m = model.m();
  if (zbar.x.size() != n || zbar.y.size() != m)
    throw std::invalid_argument("reference_subproblem: zbar has wrong block dimensions");

  double hess_f_norm = model.f.hess.operatorNorm();
  Vec hess_g_norm(m);
  for (Eigen::Index i = 0; i < m; ++i)
    hess_g_norm[i] = model.g[static_cast<size_t>(i)].hess.operatorNorm();

  Vec x = warm_start ? *warm_start : zbar.x;
  if (x.size() != n)
    throw std::invalid_argument("reference_subproblem: warm start has wrong dimension");

  Vec u(m);
  for (long it = 0; it < max_iters; ++it) {
    Vec d = x - model.x_tilde;
    Vec grad = model.f.grad_at(d);
    Vec gvals(m);
    Mat jac_t(n, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const QuadTerm& gi = model.g[static_cast<size_t>(i)];
      gvals[i] = gi.value_at(d);
      jac_t.col(i) = gi.grad_at(d);
    }
    u = lambda * gvals + zbar.y;
    Vec residual = lambda * (grad + jac_t * pos_part(u)) + x - zbar.x;
    double rn = residual.norm();
    if (rn <= tol) return {x, pos_part(u)};

    double radius = 2.0 * rn + 1e-3;
    double lip = 1.0 + lambda * hess_f_norm;
    for (Eigen::Index i = 0; i < m; ++i) {
      double grad_bound = jac_t.col(i).norm() + hess_g_norm[i] * radius;
      double value_bound =
          gvals[i] + jac_t.col(i).norm() * radius + 0.5 * hess_g_norm[i] * radius * radius;
      double y_bound = std::max(0.0, lambda * value_bound + zbar.y[i]);
      lip += lambda * (y_bound * hess_g_norm[i] + lambda * grad_bound * grad_bound);
    }
    x -= residual / lip;
  }
  Vec residual = lambda * (model.f.grad_at(x - model.x_tilde) +
                           model.g_jacobian_t(x) * pos_part(lambda * model.g_values(x) + zbar.y)) +
                 x - zbar.x;
  throw ReferenceFailure("reference_subproblem: iteration cap reached", residual.norm());
}

// Grid search for the minimizing w of the error measure. The objective is
// separable: per coordinate (c_i - lambda w)^2 + 2 lambda y_i w with
// c_i = lambda (-g_i) + y_i - ybar_i, minimized over [0, W_i] where W_i twice
// covers the unconstrained minimizer -(g_i + ybar_i/lambda).
inline Vec grid_w_minimizer(const ConvexProgram& prog, const PrimalDual& z,
                            const PrimalDual& zbar, double lambda,
                            long grid_points = 200000) {
  detail::check_psi_args(z, zbar, lambda);
  if (grid_points < 2) throw std::invalid_argument("grid_w_minimizer: grid too small");
  Vec g = prog.g(z.x).value;
  Vec w(prog.m);
  for (Eigen::Index i = 0; i < prog.m; ++i) {
    double c = lambda * (-g[i]) + z.y[i] - zbar.y[i];
    double upper = 2.0 * std::max(0.0, -(g[i] + zbar.y[i] / lambda)) + 1.0;
    double best_w = 0.0;
    double best_obj = std::numeric_limits<double>::infinity();
    for (long k = 0; k <= grid_points; ++k) {
      double cand = upper * static_cast<double>(k) / static_cast<double>(grid_points);
      double t = c - lambda * cand;
      double obj = t * t + 2.0 * lambda * z.y[i] * cand;
      if (obj < best_obj) {
        best_obj = obj;
        best_w = cand;
      }
    }
    w[i] = best_w;
  }
  return w;
}

// Two-pass recomputation of the ergodic means (first pass for the weighted
// averages, second for the enlargement correction).
inline ErgodicState two_pass_ergodic(const std::vector<HpeRecord>& records) {
  if (records.empty()) throw std::invalid_argument("two_pass_ergodic: no records");
  double weight_sum = 0.0;
  PrimalDual z_a;
  SaddleValue v_a;
  bool first = true;
  for (const HpeRecord& r : records) {
    double w = r.tau * r.lambda;
    weight_sum += w;
    if (first) {
      z_a = w * r.z_tilde;
      v_a = w * r.v;
      first = false;
    } else {
      z_a = z_a + w * r.z_tilde;
      v_a = v_a + w * r.v;
    }
  }
  z_a = (1.0 / weight_sum) * z_a;
  v_a = (1.0 / weight_sum) * v_a;
  double eps_a = 0.0;
  for (const HpeRecord& r : records) {
    double w = r.tau * r.lambda;
    eps_a += w * (r.eps + dot(r.z_tilde - z_a, r.v - v_a));
  }
  eps_a /= weight_sum;
  ErgodicState out;
  out.weight_sum = weight_sum;
  out.count = static_cast<long>(records.size());
  out.z_a = z_a;
  out.v_a = v_a;
  out.eps_a = eps_a;
  return out;
}

}  // namespace rhpemm
