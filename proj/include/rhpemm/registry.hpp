#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rhpemm/problem.hpp"

namespace rhpemm {

// Numerically stable softplus and logistic.
inline double softplus(double t) {
  return t > 0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
}
inline double logistic(double t) {
  if (t >= 0) return 1.0 / (1.0 + std::exp(-t));
  double e = std::exp(t);
  return e / (1.0 + e);
}

// sup |sigma''| for the logistic function; scales the Hessian-Lipschitz
// modulus of softplus(a'x - b) by ||a||^3.
inline constexpr double kSoftplusCurvatureRate = 0.09622504486493763;  // sqrt(3)/18

// Global bound on the third-derivative tensor norm of sqrt(1 + ||u||^2):
// 3 t (1 - t^4) maximized over t in [0,1) at t = 5^{-1/4}.
inline const double kSmoothedBallCurvatureRate = 2.4 * std::pow(5.0, -0.25);

namespace detail {

inline Vec json_to_vec(const nlohmann::json& j, const std::string& field,
                       Eigen::Index expect = -1) {
  if (!j.is_array())
    throw std::invalid_argument("problem params: '" + field + "' must be an array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!j[static_cast<size_t>(i)].is_number())
      throw std::invalid_argument("problem params: '" + field + "' must be numeric");
    v[i] = j[static_cast<size_t>(i)].get<double>();
  }
  if (expect >= 0 && v.size() != expect)
    throw std::invalid_argument("problem params: '" + field + "' has wrong length");
  return v;
}

inline Mat json_to_mat(const nlohmann::json& j, const std::string& field,
                       Eigen::Index rows, Eigen::Index cols) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows)
    throw std::invalid_argument("problem params: '" + field + "' must have " +
                                std::to_string(rows) + " rows");
  Mat a(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    Vec row = json_to_vec(j[static_cast<size_t>(r)], field, cols);
    a.row(r) = row.transpose();
  }
  return a;
}

inline nlohmann::json vec_to_json(const Vec& v) {
  nlohmann::json j = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

inline nlohmann::json mat_to_json(const Mat& a) {
  nlohmann::json j = nlohmann::json::array();
  for (Eigen::Index r = 0; r < a.rows(); ++r)
    j.push_back(vec_to_json(a.row(r).transpose()));
  return j;
}

inline void require_psd(const Mat& q, const std::string& field) {
  if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, q.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("problem params: '" + field + "' must be symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> es(q, Eigen::EigenvaluesOnly);
  double floor = -1e-10 * std::max(1.0, q.cwiseAbs().maxCoeff());
  if (es.eigenvalues().minCoeff() < floor)
    throw std::invalid_argument("problem params: '" + field +
                                "' must be positive semidefinite");
}

// Shared quadratic objective piece f(x) = x'Qx/2 + c'x.
inline std::function<FEval(const Vec&)> quadratic_objective(Mat q, Vec c) {
  return [q = std::move(q), c = std::move(c)](const Vec& x) {
    FEval r;
    Vec qx = q * x;
    r.value = 0.5 * x.dot(qx) + c.dot(x);
    r.grad = qx + c;
    r.hess = q;
    return r;
  };
}

inline std::function<GEval(const Vec&)> softplus_constraints(Mat a, Vec b, Vec r) {
  return [a = std::move(a), b = std::move(b), r = std::move(r)](const Vec& x) {
    const Eigen::Index m = a.rows();
    GEval out;
    Vec t = a * x - b;
    out.value.resize(m);
    out.jacobian_t.resize(x.size(), m);
    out.hess.resize(static_cast<size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) {
      double s = logistic(t[i]);
      out.value[i] = softplus(t[i]) - r[i];
      out.jacobian_t.col(i) = s * a.row(i).transpose();
      out.hess[static_cast<size_t>(i)] =
          (s * (1.0 - s)) * (a.row(i).transpose() * a.row(i));
    }
    return out;
  };
}

}  // namespace detail

// quad_softplus: f(x) = x'Qx/2 + c'x, g_i(x) = softplus(a_i'x - b_i) - r_i.
inline ConvexProgram make_quad_softplus(const nlohmann::json& params) {
  using detail::json_to_vec;
  using detail::json_to_mat;
  for (auto& [key, _] : params.items())
    if (key != "n" && key != "m" && key != "Q" && key != "c" && key != "A" &&
        key != "b" && key != "r")
      throw std::invalid_argument("problem params: unknown field '" + key + "'");
  const Eigen::Index n = params.at("n").get<Eigen::Index>();
  const Eigen::Index m = params.at("m").get<Eigen::Index>();
  if (n <= 0 || m <= 0)
    throw std::invalid_argument("problem params: 'n' and 'm' must be positive");
  Mat q = json_to_mat(params.at("Q"), "Q", n, n);
  detail::require_psd(q, "Q");
  Vec c = json_to_vec(params.at("c"), "c", n);
  Mat a = json_to_mat(params.at("A"), "A", m, n);
  Vec b = json_to_vec(params.at("b"), "b", m);
  Vec r = json_to_vec(params.at("r"), "r", m);

  ConvexProgram prog;
  prog.n = n;
  prog.m = m;
  prog.L0 = 0.0;
  prog.Lg.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    double an = a.row(i).norm();
    prog.Lg[i] = kSoftplusCurvatureRate * an * an * an;
  }
  prog.f_oracle = detail::quadratic_objective(q, c);
  prog.g_oracle = detail::softplus_constraints(a, b, r);
  prog.family = "quad_softplus";
  prog.params = params;
  return prog;
}

// smoothed_ball: f(x) = x'Qx/2 + c'x, g_i(x) = sqrt(1 + ||x - c_i||^2) - r_i.
inline ConvexProgram make_smoothed_ball(const nlohmann::json& params) {
  using detail::json_to_vec;
  using detail::json_to_mat;
  for (auto& [key, _] : params.items())
    if (key != "n" && key != "m" && key != "Q" && key != "c" &&
        key != "centers" && key != "radii")
      throw std::invalid_argument("problem params: unknown field '" + key + "'");
  const Eigen::Index n = params.at("n").get<Eigen::Index>();
  const Eigen::Index m = params.at("m").get<Eigen::Index>();
  if (n <= 0 || m <= 0)
    throw std::invalid_argument("problem params: 'n' and 'm' must be positive");
  Mat q = json_to_mat(params.at("Q"), "Q", n, n);
  detail::require_psd(q, "Q");
  Vec c = json_to_vec(params.at("c"), "c", n);
  Mat centers = json_to_mat(params.at("centers"), "centers", m, n);
  Vec radii = json_to_vec(params.at("radii"), "radii", m);

  ConvexProgram prog;
  prog.n = n;
  prog.m = m;
  prog.L0 = 0.0;
  prog.Lg = Vec::Constant(m, kSmoothedBallCurvatureRate);
  prog.f_oracle = detail::quadratic_objective(q, c);
  prog.g_oracle = [centers, radii, n, m](const Vec& x) {
    GEval out;
    out.value.resize(m);
    out.jacobian_t.resize(n, m);
    out.hess.resize(static_cast<size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) {
      Vec u = x - centers.row(i).transpose();
      double s = std::sqrt(1.0 + u.squaredNorm());
      out.value[i] = s - radii[i];
      out.jacobian_t.col(i) = u / s;
      out.hess[static_cast<size_t>(i)] =
          Mat::Identity(n, n) / s - (u * u.transpose()) / (s * s * s);
    }
    return out;
  };
  prog.family = "smoothed_ball";
  prog.params = params;
  return prog;
}

// known_kkt: a quad_softplus instance generated from a seed so that the KKT
// pair (x*, y*) is unique and known in closed form. Uniqueness is engineered:
// Q is strictly positive definite, the gradients of the active constraints are
// kept well conditioned (smallest singular value of the active Jacobian at
// least 0.3), and complementarity is strict (active multipliers in [0.5, 1.5],
// inactive constraint slacks at least 0.35).
inline ConvexProgram make_known_kkt(const nlohmann::json& params) {
  for (auto& [key, _] : params.items())
    if (key != "seed" && key != "n" && key != "m" && key != "n_active")
      throw std::invalid_argument("problem params: unknown field '" + key + "'");
  const std::uint64_t seed = params.value("seed", 0ULL);
  const Eigen::Index n = params.value("n", Eigen::Index{3});
  const Eigen::Index m = params.value("m", Eigen::Index{3});
  Eigen::Index n_active = params.value("n_active", std::min(n, std::max(Eigen::Index{1}, m / 2)));
  if (n <= 0 || m <= 0)
    throw std::invalid_argument("problem params: 'n' and 'm' must be positive");
  if (n_active < 1 || n_active > std::min(n, m))
    throw std::invalid_argument("problem params: 'n_active' must be in [1, min(n, m)]");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  Mat mtx(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) mtx(i, j) = gauss(rng);
  Mat q = mtx.transpose() * mtx / static_cast<double>(n) +
          0.5 * Mat::Identity(n, n);

  Vec x_star(n);
  for (Eigen::Index i = 0; i < n; ++i) x_star[i] = 2.0 * unif(rng) - 1.0;

  Mat a(m, n);
  Vec b(m), t_star(m), sig(m);
  for (int attempt = 0;; ++attempt) {
    if (attempt > 256)
      throw std::runtime_error("known_kkt: failed to draw a well-conditioned active set");
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) a(i, j) = gauss(rng);
      b[i] = unif(rng) - 0.5;
    }
    t_star = a * x_star - b;
    for (Eigen::Index i = 0; i < m; ++i) sig[i] = logistic(t_star[i]);
    Mat jac_active(n, n_active);
    for (Eigen::Index i = 0; i < n_active; ++i)
      jac_active.col(i) = sig[i] * a.row(i).transpose();
    Eigen::JacobiSVD<Mat> svd(jac_active);
    if (svd.singularValues().minCoeff() >= 0.3) break;
  }

  Vec y_star = Vec::Zero(m);
  for (Eigen::Index i = 0; i < n_active; ++i) y_star[i] = 0.5 + unif(rng);

  // r on active constraints reuses the oracle's own softplus path so that
  // g_i(x*) vanishes bitwise; inactive constraints get a strict margin.
  Vec r(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    r[i] = softplus(t_star[i]);
    if (i >= n_active) r[i] += 0.35 + 0.3 * unif(rng);
  }

  Vec c = -(q * x_star);
  for (Eigen::Index i = 0; i < n_active; ++i)
    c -= y_star[i] * sig[i] * a.row(i).transpose();

  Vec dx(n), dy(m);
  for (Eigen::Index i = 0; i < n; ++i) dx[i] = gauss(rng);
  for (Eigen::Index i = 0; i < m; ++i) dy[i] = gauss(rng);
  dx *= 0.6 / std::max(1e-12, dx.norm());

  ConvexProgram prog;
  prog.n = n;
  prog.m = m;
  prog.L0 = 0.0;
  prog.Lg.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    double an = a.row(i).norm();
    prog.Lg[i] = kSoftplusCurvatureRate * an * an * an;
  }
  prog.f_oracle = detail::quadratic_objective(q, c);
  prog.g_oracle = detail::softplus_constraints(a, b, r);
  prog.family = "known_kkt";
  prog.params = {{"seed", seed}, {"n", n}, {"m", m}, {"n_active", n_active}};
  prog.kkt_point = PrimalDual{x_star, y_star};
  prog.suggested_start = PrimalDual{x_star + dx, pos_part(y_star + 0.4 * dy)};
  return prog;
}

inline std::vector<std::string> builtin_family_names() {
  return {"quad_softplus", "smoothed_ball", "known_kkt"};
}

inline nlohmann::json default_params(const std::string& family) {
  if (family == "quad_softplus")
    return {{"n", 2},
            {"m", 2},
            {"Q", {{1.0, 0.0}, {0.0, 1.0}}},
            {"c", {1.0, -0.5}},
            {"A", {{1.0, 0.5}, {-0.5, 1.0}}},
            {"b", {0.2, -0.1}},
            {"r", {1.0, 1.2}}};
  if (family == "smoothed_ball")
    return {{"n", 2},
            {"m", 2},
            {"Q", {{1.0, 0.0}, {0.0, 2.0}}},
            {"c", {-1.0, 0.5}},
            {"centers", {{0.0, 0.0}, {1.0, 0.5}}},
            {"radii", {1.5, 1.8}}};
  if (family == "known_kkt")
    return {{"seed", 0}, {"n", 3}, {"m", 3}, {"n_active", 2}};
  throw std::invalid_argument("unknown problem family '" + family +
                              "' (known: quad_softplus, smoothed_ball, known_kkt)");
}

// Builds a registered family. Fields present in `params` override the family
// defaults; unknown fields are rejected.
inline ConvexProgram builtin_problem(const std::string& family,
                                     const nlohmann::json& params = nlohmann::json::object()) {
  nlohmann::json merged = default_params(family);
  for (auto& [key, value] : params.items()) merged[key] = value;
  if (family == "quad_softplus") return make_quad_softplus(merged);
  if (family == "smoothed_ball") return make_smoothed_ball(merged);
  if (family == "known_kkt") return make_known_kkt(merged);
  throw std::invalid_argument("unknown problem family '" + family +
                              "' (known: quad_softplus, smoothed_ball, known_kkt)");
}

inline nlohmann::json problem_to_json(const ConvexProgram& prog) {
  if (prog.family.empty())
    throw std::invalid_argument("cannot serialize an ad-hoc program (no family)");
  return {{"family", prog.family}, {"params", prog.params}};
}

inline ConvexProgram problem_from_json(const nlohmann::json& doc) {
  if (!doc.contains("family") || !doc.at("family").is_string())
    throw std::invalid_argument("problem document: missing string field 'family'");
  nlohmann::json params = doc.value("params", nlohmann::json::object());
  return builtin_problem(doc.at("family").get<std::string>(), params);
}

}  // namespace rhpemm
