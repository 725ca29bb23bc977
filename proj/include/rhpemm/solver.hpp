#pragma once

#include <chrono>
#include <cstdio>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "rhpemm/certificates.hpp"
#include "rhpemm/error_measure.hpp"
#include "rhpemm/hpe.hpp"
#include "rhpemm/subproblem.hpp"

namespace rhpemm {

struct SolverConfig {
  double sigma = 0.5;               // relative error parameter, in (0, 1)
  double theta = 0.25;              // localization parameter, in (0, 1/4]
  double delta_tol = 1e-6;          // target on ||(p, q)||
  double eps_tol = 1e-6;            // target on eps
  long max_iters = 1000;
  double inner_abs_floor = 1e-12;   // absolute floor of the model-solve tolerance
  double inner_kappa = 1e-4;        // relative factor against the localization radius
  std::optional<double> lambda1;    // initial stepsize override
  std::uint64_t seed = 0;

  // When the solution is known (constructed problems), enables the
  // known-solution monitors: Fejer descent, large-step lower bound, and the
  // worst-case rate envelopes.
  std::optional<PrimalDual> reference_solution;

  void validate() const {
    if (!(sigma > 0.0 && sigma < 1.0))
      throw std::invalid_argument("config: sigma must be in (0, 1)");
    if (!(theta > 0.0 && theta <= 0.25))
      throw std::invalid_argument("config: theta must be in (0, 1/4]");
    if (!(delta_tol > 0.0) || !(eps_tol > 0.0))
      throw std::invalid_argument("config: tolerances must be positive");
    if (max_iters < 0) throw std::invalid_argument("config: max_iters must be >= 0");
    if (!(inner_abs_floor > 0.0) || !(inner_kappa > 0.0))
      throw std::invalid_argument("config: inner tolerance knobs must be positive");
    if (lambda1 && !(*lambda1 > 0.0))
      throw std::invalid_argument("config: lambda1 must be positive");
  }
};

struct Relaxation {
  double h = 0.0;
  double tau = 0.0;   // h / (1 + h)
};

// Positive root of theta (1 + h) (1 + h (1 + 1/sigma))^2 = 1. The left side is
// strictly increasing in h with value theta < 1 at h = 0, so the root is
// unique; bisection is exact enough at double precision.
inline Relaxation derive_relaxation(double sigma, double theta) {
  if (!(sigma > 0.0 && sigma < 1.0))
    throw std::invalid_argument("derive_relaxation: sigma must be in (0, 1)");
  if (!(theta > 0.0 && theta <= 0.25))
    throw std::invalid_argument("derive_relaxation: theta must be in (0, 1/4]");
  auto value = [&](double h) {
    double t = 1.0 + h * (1.0 + 1.0 / sigma);
    return theta * (1.0 + h) * t * t;
  };
  double lo = 0.0, hi = 1.0;
  while (value(hi) < 1.0) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (value(mid) < 1.0 ? lo : hi) = mid;
  }
  Relaxation rel;
  rel.h = 0.5 * (lo + hi);
  rel.tau = rel.h / (1.0 + rel.h);
  return rel;
}

// Largest stepsize for which the self-anchored start z0 is inside the
// localization neighborhood: the unique positive root of
//   (2 ||Lg|| ||S(z0)||^2 / 3) t^3 + ((L0 + <Lg, |y0|>)/2 ||S(z0)||) t^2 = theta^2,
// shrunk by 1e-9 relative so the membership stays strict under rounding.
// If S(z0) = 0 the start is already a KKT point and any stepsize works.
inline double initial_lambda(const ConvexProgram& prog, const PrimalDual& z0,
                             double theta) {
  prog.check_point(z0);
  if ((z0.y.array() < 0.0).any())
    throw std::invalid_argument("initial_lambda: y0 must be >= 0");
  if (!(theta > 0.0 && theta <= 0.25))
    throw std::invalid_argument("initial_lambda: theta must be in (0, 1/4]");
  const double s_norm = saddle_operator(prog, z0).norm();
  if (s_norm == 0.0) return 1.0;
  const double theta2 = theta * theta;
  const double a3 = 2.0 / 3.0 * prog.Lg.norm() * s_norm * s_norm;
  const double a2 = 0.5 * (prog.L0 + prog.Lg.dot(z0.y.cwiseAbs())) * s_norm;
  if (a3 == 0.0 && a2 == 0.0)
    throw std::invalid_argument("initial_lambda: all Hessian-Lipschitz moduli vanish");
  double root;
  if (a3 == 0.0) {
    root = std::sqrt(theta2 / a2);
  } else {
    double hi = std::cbrt(theta2 / a3);
    if (a2 > 0.0) hi = std::min(hi, std::sqrt(theta2 / a2));
    hi *= 2.0;
    double lo = 0.0;
    auto p = [&](double t) { return (a3 * t + a2) * t * t - theta2; };
    while (p(hi) < 0.0) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (lo + hi);
      (p(mid) < 0.0 ? lo : hi) = mid;
    }
    root = 0.5 * (lo + hi);
  }
  return root * (1.0 - 1e-9);
}

struct ComplexityBudget {
  double c = 0.0;        // curvature-distance constant
  double eta = 0.0;      // large-step lower bound theta^2 / (sigma c)
  double rho_bar = 0.0;  // uniform radius bound at the initial stepsize
  long long pointwise_budget = 0;
  long long ergodic_budget = 0;
};

namespace detail {

inline double log_plus(double x) { return x > 1.0 ? std::log(x) : 0.0; }

inline long long ceil_to_count(double x, const char* what) {
  if (!(x >= 0.0)) return 0;
  double c = std::ceil(x);
  if (c > 9.0e18) throw std::overflow_error(std::string("complexity budget overflow: ") + what);
  return static_cast<long long>(c);
}

}  // namespace detail

// Curvature constant of the worst-case analysis: every iterate the method can
// visit stays within d0 of the start, so the radius coefficients are bounded
// by this along the whole trajectory.
inline double rate_constant(const ConvexProgram& prog, double d0, const Vec& y0,
                            double sigma) {
  const double a0 = 0.5 * (prog.L0 + prog.Lg.dot(y0.cwiseAbs()));
  const double om2 = 1.0 - sigma * sigma;
  return a0 + (0.5 + (0.5 + 2.0 * sigma / 3.0) / std::sqrt(om2)) * d0 * prog.Lg.norm();
}

// Worst-case iteration budgets to reach ||(p,q)|| <= delta_tol and
// eps <= eps_tol, split into an extragradient part (factor 2: at most half of
// all iterations beyond the stepsize-increase surplus are extragradient) and a
// geometric stepsize-growth part.
inline ComplexityBudget complexity_budget(const ConvexProgram& prog, double d0,
                                          const Vec& y0, double lambda1,
                                          double sigma, double theta, double tau,
                                          double delta_tol, double eps_tol) {
  if (!(d0 >= 0.0)) throw std::invalid_argument("complexity_budget: d0 must be >= 0");
  if (y0.size() != prog.m)
    throw std::invalid_argument("complexity_budget: y0 has wrong dimension");
  if (!(lambda1 > 0.0) || !(tau > 0.0 && tau < 1.0))
    throw std::invalid_argument("complexity_budget: invalid lambda1 or tau");
  if (!(delta_tol > 0.0) || !(eps_tol > 0.0))
    throw std::invalid_argument("complexity_budget: tolerances must be positive");

  const double lg_norm = prog.Lg.norm();
  const double om2 = 1.0 - sigma * sigma;

  ComplexityBudget out;
  out.c = rate_constant(prog, d0, y0, sigma);
  out.eta = theta * theta / (sigma * out.c);
  out.rho_bar = rho_radius_ab(0.5 * prog.L0, 2.0 / 3.0 * lg_norm,
                              theta * theta / lambda1);

  const double eta = out.eta;
  const double log_growth = std::log(1.0 / (1.0 - tau));
  const double geometric =
      std::max(detail::log_plus((1.0 + 1.0 / sigma) * out.rho_bar / (delta_tol * lambda1)),
               detail::log_plus(out.rho_bar * out.rho_bar / (2.0 * eps_tol * lambda1))) /
      log_growth;

  const double pw_v = d0 * d0 / (delta_tol * tau * (1.0 - sigma) * eta);
  const double pw_e = std::pow(sigma, 4.0 / 3.0) * d0 * d0 /
                      (std::pow(eps_tol, 2.0 / 3.0) * tau * om2 *
                       std::pow(2.0 * eta, 2.0 / 3.0));
  out.pointwise_budget = 2 * detail::ceil_to_count(std::max(pw_v, pw_e), "pointwise") +
                         detail::ceil_to_count(geometric, "geometric");

  const double cbrt4 = std::pow(2.0, 2.0 / 3.0);
  const double erg_v = cbrt4 * std::pow(d0, 4.0 / 3.0) /
                       (std::pow(delta_tol, 2.0 / 3.0) * tau *
                        std::pow(eta * std::sqrt(1.0 - sigma), 2.0 / 3.0));
  const double erg_e = cbrt4 * d0 * d0 /
                       (std::pow(eps_tol, 2.0 / 3.0) * tau * std::pow(eta * om2, 2.0 / 3.0));
  out.ergodic_budget = 2 * detail::ceil_to_count(std::max(erg_v, erg_e), "ergodic") +
                       detail::ceil_to_count(geometric, "geometric");
  return out;
}

struct IterationRecord {
  long k = 0;
  char branch = '?';
  double lambda = 0.0;       // stepsize at entry
  double sqrt_psi = 0.0;     // error measure of the entry triple
  double rho = 0.0;          // localization radius of the entry triple
  double step_norm = 0.0;    // ||z_tilde - z_prev||
  double v_norm = 0.0;
  double eps = 0.0;
  double inner_tol = 0.0;
  int newton_iters = 0;
  bool fallback = false;
  double post_sqrt_psi = 0.0;
  double post_rho = 0.0;
  double best_pointwise_score = std::numeric_limits<double>::infinity();
  double best_ergodic_score = std::numeric_limits<double>::infinity();
  double wall_ms = 0.0;
};

struct SolverState {
  long k = 0;
  PrimalDual z;         // current anchor z_{k-1}
  PrimalDual z_tilde;   // current inexact prox point
  double lambda = 0.0;
  double lambda1 = 0.0;
  double tau = 0.0;
  double h = 0.0;
  long count_A = 0;
  long count_B = 0;

  ErgodicAccumulator ergodic;
  std::vector<HpeRecord> records;            // extragradient subsequence
  std::vector<IterationRecord> trace;
  std::vector<double> ergodic_v_norms;       // ||v_a|| after each extragradient step
  std::vector<double> ergodic_eps_values;    // eps_a likewise

  std::optional<PointwiseCertificate> best_pointwise;
  double best_pointwise_score = std::numeric_limits<double>::infinity();
  std::optional<ErgodicCertificate> best_ergodic;
  double best_ergodic_score = std::numeric_limits<double>::infinity();

  std::vector<std::string> monitor_violations;
  std::optional<PrimalDual> z_star;
  double d0 = 0.0;
  double eta = 0.0;

  // Accuracy of the subproblem solve that produced the current z_tilde; the
  // first triple is exact by the initial stepsize membership, so it starts at 0.
  double last_inner_tol = 0.0;
  // Uniform radius bound at the initial stepsize; growth steps with
  // lambda >= lambda1 must stay under it.
  double rho_bar = std::numeric_limits<double>::infinity();
  long rho_bound_unchecked = 0;
};

struct SolveResult {
  bool converged = false;
  std::string termination;   // "initial_point", "pointwise", "ergodic", "max_iters"
  long iterations = 0;
  long count_A = 0;
  long count_B = 0;
  double lambda1 = 0.0;
  double tau = 0.0;
  double h = 0.0;
  double eta = 0.0;           // large-step constant, set when a reference is given
  double final_lambda = 0.0;

  std::optional<PointwiseCertificate> pointwise;
  double pointwise_score = std::numeric_limits<double>::infinity();
  std::optional<ErgodicCertificate> ergodic;
  double ergodic_score = std::numeric_limits<double>::infinity();

  std::vector<IterationRecord> trace;
  std::vector<HpeRecord> records;
  std::vector<double> ergodic_v_norms;
  std::vector<double> ergodic_eps_values;
  std::vector<std::string> monitor_violations;
  // Growth iterations whose lambda sat below lambda1, where the uniform radius
  // bound does not apply and is skipped rather than asserted.
  long rho_bound_unchecked = 0;

  double d0 = 0.0;
  std::optional<ComplexityBudget> budget;
};

namespace detail {

inline double certificate_score(double pq_norm, double eps, const SolverConfig& cfg) {
  return std::max(pq_norm / cfg.delta_tol, eps / cfg.eps_tol);
}

inline void note_violation(SolverState& st, const std::string& what) {
  st.monitor_violations.push_back("iteration " + std::to_string(st.k + 1) + ": " + what);
}

}  // namespace detail

// One outer iteration. Decides the branch by comparing the localization radius
// rho(y_tilde, theta^2/lambda) against sigma ||z_tilde - z_prev||: when the
// radius is no larger (ties included), the current triple is accurate enough
// relative to its displacement and an extragradient step is taken with the
// stepsize shrunk by (1 - tau); otherwise the anchor stays, the stepsize grows
// by 1/(1 - tau), and the model subproblem is re-solved at the frozen
// expansion point.
inline void step(const ConvexProgram& prog, SolverState& st, const SolverConfig& cfg) {
  const auto t_start = std::chrono::steady_clock::now();
  const long k = st.k + 1;
  const double theta2 = cfg.theta * cfg.theta;

  IterationRecord row;
  row.k = k;
  row.lambda = st.lambda;

  SaddleValue s = saddle_operator(prog, st.z_tilde);
  PsiEvaluation pe = psi_from_saddle(s, st.z_tilde, st.z, st.lambda);
  row.sqrt_psi = std::sqrt(std::max(0.0, pe.psi));
  row.rho = rho_radius(prog, st.z_tilde.y, theta2 / st.lambda);
  row.step_norm = (st.z_tilde - st.z).norm();
  row.v_norm = pe.v.norm();
  row.eps = pe.eps;

  {
    PointwiseCertificate cand =
        make_pointwise_certificate(prog, st.z_tilde, pe.v, pe.eps, k);
    double score = detail::certificate_score(cand.pq_norm, cand.eps, cfg);
    if (score < st.best_pointwise_score) {
      st.best_pointwise_score = score;
      st.best_pointwise = std::move(cand);
    }
  }

  if (row.rho <= cfg.sigma * row.step_norm) {
    row.branch = 'A';
    HpeRecord rec;
    rec.index = st.count_A + 1;
    rec.lambda = st.lambda;
    rec.tau = st.tau;
    rec.z_tilde = st.z_tilde;
    rec.v = pe.v;
    rec.eps = pe.eps;
    rec.z_prev = st.z;
    // z_next = z_prev - tau lambda v; the dual block is written as the convex
    // combination (1-tau) y_prev + tau (lambda g + y_prev)_+ so nonnegativity
    // is exact in floating point.
    rec.z_next.x = st.z.x - st.tau * st.lambda * pe.v.primal;
    rec.z_next.y = (1.0 - st.tau) * st.z.y +
                   st.tau * pos_part(st.lambda * (-s.dual) + st.z.y);

    SigmaInequality sc = check_sigma_inequality(rec, cfg.sigma);
    if (!sc.holds)
      detail::note_violation(st, "relative error condition failed on an extragradient step");

    if (st.z_star) {
      const PrimalDual& zs = *st.z_star;
      double before = (zs - st.z).squared_norm();
      double after = (zs - rec.z_next).squared_norm();
      double strong = st.tau * (1.0 - cfg.sigma * cfg.sigma) * row.step_norm * row.step_norm;
      if (after + strong > before + 1e-10)
        detail::note_violation(st, "Fejer descent failed against the reference solution");
      double lv = st.lambda * row.v_norm;
      if (lv < (1.0 - cfg.sigma) * row.step_norm - 1e-10 ||
          lv > (1.0 + cfg.sigma) * row.step_norm + 1e-10)
        detail::note_violation(st, "||lambda v|| left the sigma displacement band");
      if (2.0 * st.lambda * pe.eps >
          cfg.sigma * cfg.sigma * row.step_norm * row.step_norm + 1e-10)
        detail::note_violation(st, "2 lambda eps exceeded the sigma displacement bound");
      if (st.eta > 0.0 && st.lambda * row.step_norm < st.eta - 1e-10)
        detail::note_violation(st, "large-step lower bound failed");
    }

    st.records.push_back(rec);
    st.ergodic.add(rec);
    ErgodicState es = st.ergodic.finalize();
    st.ergodic_v_norms.push_back(es.v_a.norm());
    st.ergodic_eps_values.push_back(es.eps_a);
    {
      ErgodicCertificate ecert = make_ergodic_certificate(prog, es);
      double escore = detail::certificate_score(ecert.pq_norm, ecert.eps, cfg);
      if (escore < st.best_ergodic_score) {
        st.best_ergodic_score = escore;
        st.best_ergodic = std::move(ecert);
      }
    }

    if (st.z_star && st.eta > 0.0) {
      long i = st.count_A + 1;
      RateBounds rb = abstract_rate_bounds(st.d0, cfg.sigma, st.tau, st.eta, i);
      bool joint = false;
      for (const HpeRecord& r : st.records)
        if (r.v.norm() <= rb.pointwise_v + 1e-10 && r.eps <= rb.pointwise_eps + 1e-10) {
          joint = true;
          break;
        }
      if (!joint)
        detail::note_violation(st, "pointwise worst-case rate envelope failed");
      if (st.ergodic_v_norms.back() > rb.ergodic_v + 1e-10 ||
          st.ergodic_eps_values.back() > rb.ergodic_eps + 1e-10)
        detail::note_violation(st, "ergodic worst-case rate envelope failed");
    }

    st.z = rec.z_next;
    st.lambda *= 1.0 - st.tau;
    ++st.count_A;
    row.inner_tol = std::max(cfg.inner_abs_floor,
                             cfg.inner_kappa * rho_radius(prog, st.z_tilde.y, theta2 / st.lambda));
  } else {
    row.branch = 'B';

    // Growth-step bounds on the entry triple: the radius stays under the
    // uniform bound whenever lambda has not dropped below its initial value,
    // and the residual pair is controlled by the radius because the predicate
    // just failed (sigma ||z_tilde - z|| < rho).
    if (st.lambda >= st.lambda1 * (1.0 - 1e-12)) {
      if (row.rho > st.rho_bar * (1.0 + 1e-12))
        detail::note_violation(st, "radius exceeded its uniform bound on a growth step");
    } else {
      ++st.rho_bound_unchecked;
    }
    {
      const double slack = 10.0 * st.last_inner_tol;
      if (cfg.sigma > 0.0 &&
          row.v_norm > ((1.0 + 1.0 / cfg.sigma) * row.rho + slack) / st.lambda + 1e-12)
        detail::note_violation(st, "residual norm exceeded its growth-step bound");
      double rs = row.rho + slack;
      if (row.eps > rs * rs / (2.0 * st.lambda) * (1.0 + 1e-12))
        detail::note_violation(st, "complementarity gap exceeded its growth-step bound");
    }

    const double lambda_next = st.lambda / (1.0 - st.tau);
    const double inner_tol =
        std::max(cfg.inner_abs_floor,
                 cfg.inner_kappa * rho_radius(prog, st.z_tilde.y, theta2 / lambda_next));
    row.inner_tol = inner_tol;
    QuadraticModel model = build_model(prog, st.z_tilde.x);
    SubproblemSolution sol =
        solve_model_saddle(model, st.z, lambda_next, inner_tol, &st.z_tilde.x);
    row.newton_iters = sol.newton_iters;
    row.fallback = sol.fallback_used;
    st.z_tilde = sol.z;
    st.lambda = lambda_next;
    st.last_inner_tol = inner_tol;
    ++st.count_B;
  }

  PsiEvaluation post = psi(prog, st.z_tilde, st.z, st.lambda);
  row.post_sqrt_psi = std::sqrt(std::max(0.0, post.psi));
  row.post_rho = rho_radius(prog, st.z_tilde.y, theta2 / st.lambda);
  if (row.post_sqrt_psi > row.post_rho + 10.0 * row.inner_tol)
    detail::note_violation(st, "localization invariant failed after the update");
  if ((st.z.y.array() < 0.0).any() || (st.z_tilde.y.array() < 0.0).any())
    detail::note_violation(st, "a dual block left the nonnegative orthant");
  {
    double lam_formula =
        st.lambda1 * std::pow(1.0 / (1.0 - st.tau),
                              static_cast<double>(st.count_B - st.count_A));
    if (std::abs(st.lambda - lam_formula) > 1e-12 * lam_formula)
      detail::note_violation(st, "stepsize drifted from the branch-count formula");
  }

  row.best_pointwise_score = st.best_pointwise_score;
  row.best_ergodic_score = st.best_ergodic_score;
  row.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t_start)
                    .count();
  st.trace.push_back(row);
  st.k = k;
}

inline SolveResult run(const ConvexProgram& prog, const PrimalDual& z0,
                       const SolverConfig& cfg) {
  cfg.validate();
  prog.check_point(z0);
  if ((z0.y.array() < 0.0).any())
    throw std::invalid_argument("run: the start dual block must be >= 0");

  SolveResult res;

  // Zero-iteration candidate: the self-anchored triple at z0 with unit
  // stepsize is already a valid certificate; an exact KKT start returns here.
  {
    PsiEvaluation pe0 = psi(prog, z0, z0, 1.0);
    PointwiseCertificate c0 = make_pointwise_certificate(prog, z0, pe0.v, pe0.eps, 0);
    res.pointwise_score = detail::certificate_score(c0.pq_norm, c0.eps, cfg);
    res.pointwise = c0;
    if (res.pointwise_score <= 1.0) {
      res.converged = true;
      res.termination = "initial_point";
      return res;
    }
  }

  Relaxation rel = derive_relaxation(cfg.sigma, cfg.theta);
  const double lam1 = cfg.lambda1 ? *cfg.lambda1 : initial_lambda(prog, z0, cfg.theta);
  if (!neighborhood_contains(prog, z0, z0, lam1, cfg.theta * cfg.theta)) {
    if (cfg.lambda1)
      throw std::invalid_argument(
          "run: the lambda1 override breaks the initial localization membership");
    throw std::logic_error("run: initial stepsize failed its own localization membership");
  }

  SolverState st;
  st.z = z0;
  st.z_tilde = z0;
  st.lambda = lam1;
  st.lambda1 = lam1;
  st.tau = rel.tau;
  st.h = rel.h;
  st.best_pointwise = res.pointwise;
  st.best_pointwise_score = res.pointwise_score;
  {
    double lg_norm = prog.Lg.norm();
    if (prog.L0 > 0.0 || lg_norm > 0.0)
      st.rho_bar = rho_radius_ab(0.5 * prog.L0, 2.0 / 3.0 * lg_norm,
                                 cfg.theta * cfg.theta / lam1);
  }

  res.lambda1 = lam1;
  res.tau = rel.tau;
  res.h = rel.h;

  if (cfg.reference_solution) {
    st.z_star = cfg.reference_solution;
    st.d0 = (z0 - *st.z_star).norm();
    st.eta = cfg.theta * cfg.theta /
             (cfg.sigma * rate_constant(prog, st.d0, z0.y, cfg.sigma));
    res.d0 = st.d0;
    res.eta = st.eta;
    // Tight tolerances can push the budget counts past the integer range; the
    // budget is then omitted while the rate monitors keep running.
    try {
      res.budget = complexity_budget(prog, st.d0, z0.y, lam1, cfg.sigma, cfg.theta,
                                     rel.tau, cfg.delta_tol, cfg.eps_tol);
    } catch (const std::overflow_error&) {
    }
  }

  while (st.k < cfg.max_iters) {
    try {
      step(prog, st, cfg);
    } catch (const SubproblemFailure&) {
      // The requested accuracy fell below what the inner solve can certify in
      // floating point (the residual scales with the stepsize). Stop with
      // everything accumulated so far instead of propagating.
      res.termination = "inner_stall";
      break;
    }
    if (st.best_pointwise_score <= 1.0) {
      res.converged = true;
      res.termination = "pointwise";
      break;
    }
    if (st.best_ergodic_score <= 1.0) {
      res.converged = true;
      res.termination = "ergodic";
      break;
    }
  }
  if (!res.converged && res.termination.empty()) res.termination = "max_iters";

  res.iterations = st.k;
  res.count_A = st.count_A;
  res.count_B = st.count_B;
  res.final_lambda = st.lambda;
  res.pointwise = st.best_pointwise;
  res.pointwise_score = st.best_pointwise_score;
  res.ergodic = st.best_ergodic;
  res.ergodic_score = st.best_ergodic_score;
  res.trace = std::move(st.trace);
  res.records = std::move(st.records);
  res.ergodic_v_norms = std::move(st.ergodic_v_norms);
  res.ergodic_eps_values = std::move(st.ergodic_eps_values);
  res.monitor_violations = std::move(st.monitor_violations);
  res.rho_bound_unchecked = st.rho_bound_unchecked;
  return res;
}

inline void write_trace_csv(std::ostream& os, const std::vector<IterationRecord>& trace) {
  os << "k,branch,lambda,sqrt_psi,rho,step_norm,v_norm,eps,inner_tol,newton_iters,"
        "fallback,post_sqrt_psi,post_rho,best_pointwise_score,best_ergodic_score,wall_ms\n";
  char buf[512];
  for (const IterationRecord& r : trace) {
    std::snprintf(buf, sizeof(buf),
                  "%ld,%c,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%d,%.17g,%.17g,"
                  "%.17g,%.17g,%.17g\n",
                  r.k, r.branch, r.lambda, r.sqrt_psi, r.rho, r.step_norm, r.v_norm,
                  r.eps, r.inner_tol, r.newton_iters, r.fallback ? 1 : 0,
                  r.post_sqrt_psi, r.post_rho, r.best_pointwise_score,
                  r.best_ergodic_score, r.wall_ms);
    os << buf;
  }
}

}  // namespace rhpemm
