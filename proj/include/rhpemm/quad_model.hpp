#pragma once

#include <vector>

#include "rhpemm/problem.hpp"

namespace rhpemm {

// One second-order Taylor piece phi(x) = v0 + <g0, x - x0> + (x-x0)'H(x-x0)/2.
struct QuadTerm {
  double value0 = 0.0;
  Vec grad0;
  Mat hess;

  double value_at(const Vec& d) const {
    return value0 + grad0.dot(d) + 0.5 * d.dot(hess * d);
  }
  Vec grad_at(const Vec& d) const { return grad0 + hess * d; }
};

// Exact second-order Taylor models of f and every g_i taken at x_tilde. The
// model touches the original problem at the expansion point: values, gradients
// and Hessians agree there, so the model saddle operator coincides with the
// true one at (x_tilde, y) for every y.
struct QuadraticModel {
  Vec x_tilde;
  QuadTerm f;
  std::vector<QuadTerm> g;

  Eigen::Index n() const { return x_tilde.size(); }
  Eigen::Index m() const { return static_cast<Eigen::Index>(g.size()); }

  Vec g_values(const Vec& x) const {
    Vec d = x - x_tilde;
    Vec out(m());
    for (Eigen::Index i = 0; i < m(); ++i) out[i] = g[static_cast<size_t>(i)].value_at(d);
    return out;
  }
  Mat g_jacobian_t(const Vec& x) const {
    Vec d = x - x_tilde;
    Mat out(n(), m());
    for (Eigen::Index i = 0; i < m(); ++i) out.col(i) = g[static_cast<size_t>(i)].grad_at(d);
    return out;
  }
};

inline QuadraticModel build_model(const ConvexProgram& prog, const Vec& x_tilde) {
  if (x_tilde.size() != prog.n)
    throw std::invalid_argument("build_model: x_tilde has wrong dimension");
  FEval fe = prog.f(x_tilde);
  GEval ge = prog.g(x_tilde);
  QuadraticModel model;
  model.x_tilde = x_tilde;
  model.f = {fe.value, fe.grad, fe.hess};
  model.g.reserve(static_cast<size_t>(prog.m));
  for (Eigen::Index i = 0; i < prog.m; ++i)
    model.g.push_back({ge.value[i], ge.jacobian_t.col(i), ge.hess[static_cast<size_t>(i)]});
  return model;
}

// Saddle operator of the model problem at z = (x, y).
inline SaddleValue model_saddle_operator(const QuadraticModel& model, const PrimalDual& z) {
  if (z.x.size() != model.n() || z.y.size() != model.m())
    throw std::invalid_argument("model_saddle_operator: wrong block dimensions");
  Vec d = z.x - model.x_tilde;
  Vec primal = model.f.grad_at(d);
  Vec gvals(model.m());
  for (Eigen::Index i = 0; i < model.m(); ++i) {
    const QuadTerm& gi = model.g[static_cast<size_t>(i)];
    gvals[i] = gi.value_at(d);
    primal += z.y[i] * gi.grad_at(d);
  }
  return {primal, -gvals};
}

// Upper bound on ||S(x,y) - S_model(x,y)|| from the declared Hessian-Lipschitz
// moduli: (L0 + <Lg, |y|>)/2 ||x - x_tilde||^2 + ||Lg||/6 ||x - x_tilde||^3.
inline double model_gap_bound(const ConvexProgram& prog, const PrimalDual& z,
                              const Vec& x_tilde) {
  prog.check_point(z);
  if (x_tilde.size() != prog.n)
    throw std::invalid_argument("model_gap_bound: x_tilde has wrong dimension");
  double d = (z.x - x_tilde).norm();
  double a = 0.5 * (prog.L0 + prog.Lg.dot(z.y.cwiseAbs()));
  return a * d * d + prog.Lg.norm() / 6.0 * d * d * d;
}

}  // namespace rhpemm
