#pragma once

#include <random>
#include <string>

#include <nlohmann/json.hpp>

#include "rhpemm/error_measure.hpp"
#include "rhpemm/hpe.hpp"
#include "rhpemm/registry.hpp"
#include "rhpemm/saddle.hpp"

namespace rhpemm {

class CertificateError : public std::runtime_error {
 public:
  CertificateError(const std::string& relation_, const std::string& what)
      : std::runtime_error(what), relation(relation_) {}
  std::string relation;
};

// Approximate KKT certificate at a single iterate z = (x, y), y >= 0:
//   p = grad f(x) + grad g(x) y        (exact stationarity shift)
//   g(x) + q <= 0                      (shifted feasibility)
//   <y, g(x) + q> = -eps               (shifted eps-complementarity)
// with (p, q) = v from the proximal triple and eps its enlargement.
struct PointwiseCertificate {
  PrimalDual z;
  Vec p;
  Vec q;
  double eps = 0.0;
  long iteration = 0;

  double pq_norm = 0.0;
  // residuals of the defining relations, each should be ~0
  double stationarity_gap = 0.0;    // ||p - grad f - grad g y||
  double primal_slack_max = 0.0;    // max_i (g + q)_i, needs <= 0
  double dual_min = 0.0;            // min_i y_i, needs >= 0
  double complementarity_gap = 0.0; // |<y, g + q> + eps|
};

inline PointwiseCertificate make_pointwise_certificate(const ConvexProgram& prog,
                                                       const PrimalDual& z,
                                                       const SaddleValue& v, double eps,
                                                       long iteration,
                                                       double tol = 1e-9) {
  prog.check_point(z);
  FEval fe = prog.f(z.x);
  GEval ge = prog.g(z.x);
  PointwiseCertificate cert;
  cert.z = z;
  cert.p = v.primal;
  cert.q = v.dual;
  cert.eps = eps;
  cert.iteration = iteration;
  cert.pq_norm = v.norm();

  Vec grad_lag = fe.grad + ge.jacobian_t * z.y;
  Vec shifted = ge.value + cert.q;
  cert.stationarity_gap = (cert.p - grad_lag).norm();
  cert.primal_slack_max = shifted.size() ? shifted.maxCoeff() : 0.0;
  cert.dual_min = z.y.size() ? z.y.minCoeff() : 0.0;
  cert.complementarity_gap = std::abs(z.y.dot(shifted) + eps);

  double scale = 1.0 + grad_lag.norm() + cert.pq_norm;
  if (cert.stationarity_gap > tol * scale)
    throw CertificateError("stationarity",
                           "pointwise certificate: p does not match the Lagrangian gradient");
  if (cert.primal_slack_max > tol)
    throw CertificateError("shifted_feasibility",
                           "pointwise certificate: g(x) + q has a positive entry");
  if (cert.dual_min < -tol)
    throw CertificateError("dual_nonnegativity",
                           "pointwise certificate: y has a negative entry");
  if (eps < -tol)
    throw CertificateError("eps_nonnegativity",
                           "pointwise certificate: eps is negative");
  if (cert.complementarity_gap > tol * (1.0 + std::abs(eps) + z.y.norm() * shifted.norm()))
    throw CertificateError("complementarity",
                           "pointwise certificate: <y, g + q> != -eps");
  return cert;
}

// Ergodic certificate from the weighted means: the shifted feasibility
// g(x_a) + q_a <= 0 holds by convexity of g, eps_a >= 0, and
// eps' = eps_a + <y_a, g(x_a) + q_a> lies in [0, eps_a] and bounds the
// objective eps-subgradient enlargement at x_a.
struct ErgodicCertificate {
  PrimalDual z;
  Vec p;
  Vec q;
  double eps = 0.0;
  double eps_prime = 0.0;
  long count = 0;          // extragradient iterations averaged
  double weight_sum = 0.0;

  double pq_norm = 0.0;
  double primal_slack_max = 0.0;
  double dual_min = 0.0;
  double complementarity_lhs = 0.0;  // <y, g + q>, needs >= -eps
};

inline ErgodicCertificate make_ergodic_certificate(const ConvexProgram& prog,
                                                   const ErgodicState& state,
                                                   double tol = 1e-9) {
  prog.check_point(state.z_a);
  GEval ge = prog.g(state.z_a.x);
  ErgodicCertificate cert;
  cert.z = state.z_a;
  cert.p = state.v_a.primal;
  cert.q = state.v_a.dual;
  cert.eps = state.eps_a;
  cert.count = state.count;
  cert.weight_sum = state.weight_sum;
  cert.pq_norm = state.v_a.norm();

  Vec shifted = ge.value + cert.q;
  cert.primal_slack_max = shifted.size() ? shifted.maxCoeff() : 0.0;
  cert.dual_min = state.z_a.y.size() ? state.z_a.y.minCoeff() : 0.0;
  cert.complementarity_lhs = state.z_a.y.dot(shifted);
  cert.eps_prime = cert.eps + cert.complementarity_lhs;

  if (cert.eps < -tol)
    throw CertificateError("eps_nonnegativity", "ergodic certificate: eps_a is negative");
  if (cert.primal_slack_max > tol)
    throw CertificateError("shifted_feasibility",
                           "ergodic certificate: g(x_a) + q_a has a positive entry");
  if (cert.dual_min < -tol)
    throw CertificateError("dual_nonnegativity", "ergodic certificate: y_a has a negative entry");
  if (cert.eps_prime < -tol || cert.eps_prime > cert.eps + tol)
    throw CertificateError("eps_prime_range",
                           "ergodic certificate: eps' outside [0, eps_a]");
  return cert;
}

// The three equivalent readings of an eps-subgradient triple (z, v, eps) of
// the saddle function, with w = -(g(x) + q) and eps' = eps - <y, w>:
//   (a) v is an eps-subgradient of the convex-concave pair at z (sampled);
//   (b) w >= 0, <y, w> <= eps, and p is an eps'-subgradient in x (sampled);
//   (c) 0 <= eps' <= eps and -w is in the (eps - eps')-normal cone at y (exact).
struct TransposeConditions {
  bool saddle_sampled = false;      // (a) evidence over the provided samples
  bool multiplier_split = false;    // (b) exact inequality parts
  bool normal_cone_split = false;   // (c) exact inequality parts
  double eps_prime = 0.0;
  Vec w;
};

inline TransposeConditions transpose_conditions(const ConvexProgram& prog,
                                                const PrimalDual& z,
                                                const SaddleValue& v, double eps,
                                                const std::vector<PrimalDual>& samples,
                                                double tol = 1e-9) {
  prog.check_point(z);
  TransposeConditions out;
  Vec g = prog.g(z.x).value;
  out.w = -(g + v.dual);
  double yw = z.y.dot(out.w);
  out.eps_prime = eps - yw;

  double wmin = out.w.size() ? out.w.minCoeff() : 0.0;
  out.multiplier_split = wmin >= -tol && yw <= eps + tol;
  // -w in the (eps - eps')-normal cone at y >= 0 means w >= 0 and
  // <y, w> <= eps - eps'; here eps - eps' = <y, w> by construction.
  out.normal_cone_split =
      wmin >= -tol && out.eps_prime >= -tol && out.eps_prime <= eps + tol;
  out.saddle_sampled = eps_saddle_subgradient_check(prog, z, v, std::max(0.0, eps),
                                                    samples, tol);
  return out;
}

// Sampled evidence that p is an eps'-subgradient of the Lagrangian in x at
// (x_tilde, y_tilde): f(x) + <y_tilde, g(x)> >= f(x_tilde) + <y_tilde, g(x_tilde)>
//                     + <p, x - x_tilde> - eps' for all sampled x.
inline bool eps_x_subgradient_check(const ConvexProgram& prog, const PrimalDual& z_tilde,
                                    const Vec& p, double eps_prime,
                                    const std::vector<PrimalDual>& samples,
                                    double tol = 1e-9) {
  double base = prog.f(z_tilde.x).value + z_tilde.y.dot(prog.g(z_tilde.x).value);
  for (const PrimalDual& s : samples) {
    double lhs = prog.f(s.x).value + z_tilde.y.dot(prog.g(s.x).value) - base;
    double rhs = p.dot(s.x - z_tilde.x) - eps_prime;
    if (lhs < rhs - tol * (1.0 + std::abs(lhs) + std::abs(rhs))) return false;
  }
  return true;
}

// --- JSON (de)serialization -------------------------------------------------

inline nlohmann::json certificate_to_json(const PointwiseCertificate& c) {
  return {{"type", "pointwise"},
          {"x", detail::vec_to_json(c.z.x)},
          {"y", detail::vec_to_json(c.z.y)},
          {"p", detail::vec_to_json(c.p)},
          {"q", detail::vec_to_json(c.q)},
          {"eps", c.eps},
          {"iteration", c.iteration},
          {"pq_norm", c.pq_norm}};
}

inline nlohmann::json certificate_to_json(const ErgodicCertificate& c) {
  return {{"type", "ergodic"},
          {"x", detail::vec_to_json(c.z.x)},
          {"y", detail::vec_to_json(c.z.y)},
          {"p", detail::vec_to_json(c.p)},
          {"q", detail::vec_to_json(c.q)},
          {"eps", c.eps},
          {"eps_prime", c.eps_prime},
          {"count", c.count},
          {"weight_sum", c.weight_sum},
          {"pq_norm", c.pq_norm}};
}

// Re-verifies a serialized certificate against a program; throws
// CertificateError naming the violated relation.
inline void verify_certificate_json(const ConvexProgram& prog, const nlohmann::json& doc,
                                    double tol = 1e-9) {
  if (!doc.contains("type"))
    throw std::invalid_argument("certificate document: missing field 'type'");
  PrimalDual z{detail::json_to_vec(doc.at("x"), "x", prog.n),
               detail::json_to_vec(doc.at("y"), "y", prog.m)};
  SaddleValue v{detail::json_to_vec(doc.at("p"), "p", prog.n),
                detail::json_to_vec(doc.at("q"), "q", prog.m)};
  double eps = doc.at("eps").get<double>();
  std::string type = doc.at("type").get<std::string>();
  if (type == "pointwise") {
    make_pointwise_certificate(prog, z, v, eps, doc.value("iteration", 0L), tol);
  } else if (type == "ergodic") {
    ErgodicState st;
    st.z_a = z;
    st.v_a = v;
    st.eps_a = eps;
    st.count = doc.value("count", 0L);
    st.weight_sum = doc.value("weight_sum", 0.0);
    make_ergodic_certificate(prog, st, tol);
  } else {
    throw std::invalid_argument("certificate document: unknown type '" + type + "'");
  }
}

}  // namespace rhpemm
