#pragma once

#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "rhpemm/types.hpp"

namespace rhpemm {

// Thrown when an oracle produces a non-finite value.
class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FEval {
  double value = 0.0;
  Vec grad;
  Mat hess;
};

struct GEval {
  Vec value;                // g_1(x), ..., g_m(x)
  Mat jacobian_t;           // n x m, column i holds grad g_i(x)
  std::vector<Mat> hess;    // m Hessians, each n x n
};

// Smooth convex program
//   minimize f(x)  subject to  g_i(x) <= 0, i = 1..m,
// with f and every g_i twice continuously differentiable and convex, and
// Hessians Lipschitz with declared moduli L0 (for f) and Lg_i (for g_i).
// The moduli are upper bounds supplied by the problem family; at least one
// Lg_i or L0 must be positive for the localization radius to be defined.
struct ConvexProgram {
  Eigen::Index n = 0;
  Eigen::Index m = 0;
  std::function<FEval(const Vec&)> f_oracle;
  std::function<GEval(const Vec&)> g_oracle;
  double L0 = 0.0;
  Vec Lg;

  std::string family;        // registry key, empty for ad-hoc programs
  nlohmann::json params;     // registry parameters for round-tripping

  // Populated by constructed families that know their unique KKT pair.
  std::optional<PrimalDual> kkt_point;
  // Deterministic start with nonnegative dual block, if the family suggests one.
  std::optional<PrimalDual> suggested_start;

  FEval f(const Vec& x) const {
    if (x.size() != n) throw std::invalid_argument("f: x has wrong dimension");
    FEval r = f_oracle(x);
    if (!std::isfinite(r.value) || !r.grad.allFinite() || !r.hess.allFinite())
      throw OracleError("objective oracle returned a non-finite value");
    return r;
  }

  GEval g(const Vec& x) const {
    if (x.size() != n) throw std::invalid_argument("g: x has wrong dimension");
    GEval r = g_oracle(x);
    if (!r.value.allFinite() || !r.jacobian_t.allFinite())
      throw OracleError("constraint oracle returned a non-finite value");
    for (const Mat& h : r.hess)
      if (!h.allFinite())
        throw OracleError("constraint oracle returned a non-finite Hessian");
    return r;
  }

  void check_point(const PrimalDual& z) const {
    if (z.x.size() != n || z.y.size() != m)
      throw std::invalid_argument("point has wrong block dimensions");
  }
};

// Blockwise KKT residual at z = (x, y):
//   stationarity      grad f(x) + sum_i y_i grad g_i(x)
//   primal violation  max(g(x), 0)
//   dual violation    max(-y, 0)
//   complementarity   |<y, g(x)>|
struct KktResidual {
  Vec stationarity;
  Vec primal_violation;
  Vec dual_violation;
  double complementarity_gap = 0.0;

  double max_norm() const {
    double s = stationarity.size() ? stationarity.cwiseAbs().maxCoeff() : 0.0;
    double p = primal_violation.size() ? primal_violation.maxCoeff() : 0.0;
    double d = dual_violation.size() ? dual_violation.maxCoeff() : 0.0;
    return std::max(std::max(s, p), std::max(d, complementarity_gap));
  }
};

inline KktResidual kkt_residual(const ConvexProgram& prog, const PrimalDual& z) {
  prog.check_point(z);
  FEval fe = prog.f(z.x);
  GEval ge = prog.g(z.x);
  KktResidual r;
  r.stationarity = fe.grad + ge.jacobian_t * z.y;
  r.primal_violation = pos_part(ge.value);
  r.dual_violation = neg_part(z.y);
  r.complementarity_gap = std::abs(z.y.dot(ge.value));
  return r;
}

// ---------------------------------------------------------------------------
// Sampled consistency checks. These are diagnostics used by the test suite;
// they compare oracle derivatives against central finite differences and the
// declared Hessian-Lipschitz moduli against sampled difference quotients.

struct DerivativeCheck {
  double max_grad_rel_err = 0.0;   // f gradient vs. differences of f
  double max_hess_rel_err = 0.0;   // f Hessian vs. differences of grad f
  double max_g_grad_rel_err = 0.0;
  double max_g_hess_rel_err = 0.0;
};

namespace detail {

inline double rel_err(double got, double want) {
  return std::abs(got - want) / std::max(1.0, std::abs(want));
}

}  // namespace detail

inline DerivativeCheck finite_difference_check(const ConvexProgram& prog,
                                               std::mt19937_64& rng,
                                               int points = 100,
                                               double radius = 1.0,
                                               double h = 1e-5) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  DerivativeCheck out;
  for (int p = 0; p < points; ++p) {
    Vec x(prog.n);
    for (Eigen::Index i = 0; i < prog.n; ++i) x[i] = radius * gauss(rng);
    FEval fe = prog.f(x);
    GEval ge = prog.g(x);
    for (Eigen::Index i = 0; i < prog.n; ++i) {
      Vec e = Vec::Zero(prog.n);
      e[i] = h;
      FEval fp = prog.f(x + e), fm = prog.f(x - e);
      GEval gp = prog.g(x + e), gm = prog.g(x - e);
      out.max_grad_rel_err = std::max(
          out.max_grad_rel_err,
          detail::rel_err((fp.value - fm.value) / (2 * h), fe.grad[i]));
      Vec hcol = (fp.grad - fm.grad) / (2 * h);
      for (Eigen::Index j = 0; j < prog.n; ++j)
        out.max_hess_rel_err =
            std::max(out.max_hess_rel_err, detail::rel_err(hcol[j], fe.hess(j, i)));
      for (Eigen::Index c = 0; c < prog.m; ++c) {
        out.max_g_grad_rel_err = std::max(
            out.max_g_grad_rel_err,
            detail::rel_err((gp.value[c] - gm.value[c]) / (2 * h), ge.jacobian_t(i, c)));
        Vec gh = (gp.jacobian_t.col(c) - gm.jacobian_t.col(c)) / (2 * h);
        for (Eigen::Index j = 0; j < prog.n; ++j)
          out.max_g_hess_rel_err = std::max(
              out.max_g_hess_rel_err, detail::rel_err(gh[j], ge.hess[c](j, i)));
      }
    }
  }
  return out;
}

// Smallest sampled Hessian eigenvalue over random points (convexity evidence).
inline double sampled_min_hessian_eigenvalue(const ConvexProgram& prog,
                                             std::mt19937_64& rng,
                                             int points = 50,
                                             double radius = 2.0) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  double min_eig = std::numeric_limits<double>::infinity();
  for (int p = 0; p < points; ++p) {
    Vec x(prog.n);
    for (Eigen::Index i = 0; i < prog.n; ++i) x[i] = radius * gauss(rng);
    Eigen::SelfAdjointEigenSolver<Mat> es;
    es.compute(prog.f(x).hess, Eigen::EigenvaluesOnly);
    min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
    GEval ge = prog.g(x);
    for (const Mat& h : ge.hess) {
      es.compute(h, Eigen::EigenvaluesOnly);
      min_eig = std::min(min_eig, es.eigenvalues().minCoeff());
    }
  }
  return min_eig;
}

struct LipschitzSample {
  double max_f_ratio = 0.0;   // ||hess f(x) - hess f(x')|| / ||x - x'||
  Vec max_g_ratio;            // per constraint
};

inline LipschitzSample sampled_hessian_lipschitz(const ConvexProgram& prog,
                                                 std::mt19937_64& rng,
                                                 int pairs = 200,
                                                 double radius = 2.0) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  LipschitzSample out;
  out.max_g_ratio = Vec::Zero(prog.m);
  for (int p = 0; p < pairs; ++p) {
    Vec a(prog.n), b(prog.n);
    for (Eigen::Index i = 0; i < prog.n; ++i) {
      a[i] = radius * gauss(rng);
      b[i] = radius * gauss(rng);
    }
    double d = (a - b).norm();
    if (d < 1e-12) continue;
    FEval fa = prog.f(a), fb = prog.f(b);
    out.max_f_ratio =
        std::max(out.max_f_ratio, (fa.hess - fb.hess).operatorNorm() / d);
    GEval ga = prog.g(a), gb = prog.g(b);
    for (Eigen::Index c = 0; c < prog.m; ++c)
      out.max_g_ratio[c] = std::max(out.max_g_ratio[c],
                                    (ga.hess[c] - gb.hess[c]).operatorNorm() / d);
  }
  return out;
}

}  // namespace rhpemm
