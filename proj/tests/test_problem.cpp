#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "rhpemm/problem.hpp"
#include "rhpemm/registry.hpp"
#include "toys.hpp"

using namespace rhpemm;

TEST_CASE("kkt residual blocks on hand-built programs") {
  auto prog = toys::quad_linear();

  SECTION("interior dual, violated constraint") {
    PrimalDual z{Vec::Constant(1, 2.0), Vec::Zero(1)};
    auto r = kkt_residual(prog, z);
    CHECK(r.stationarity[0] == 2.0);
    CHECK(r.primal_violation[0] == 1.0);
    CHECK(r.dual_violation[0] == 0.0);
    CHECK(r.complementarity_gap == 0.0);
    CHECK(r.max_norm() == 2.0);
  }

  SECTION("negative multiplier shows up only in the dual block") {
    PrimalDual z{Vec::Constant(1, 1.0), Vec::Constant(1, -3.0)};
    auto r = kkt_residual(prog, z);
    CHECK(r.stationarity[0] == Catch::Approx(-2.0).margin(1e-15));  // 1 + (-3)
    CHECK(r.primal_violation[0] == 0.0);
    CHECK(r.dual_violation[0] == 3.0);
    CHECK(r.complementarity_gap == 0.0);  // g == 0 at x = 1
  }

  SECTION("exact solution has zero residual") {
    // min x^2/2 s.t. x <= 1 is solved at x = 0 with y = 0.
    PrimalDual z{Vec::Zero(1), Vec::Zero(1)};
    auto r = kkt_residual(prog, z);
    CHECK(r.max_norm() == 0.0);
  }
}

TEST_CASE("stationarity of the softplus objective at the origin") {
  auto prog = toys::softplus_objective();
  PrimalDual z{Vec::Zero(1), Vec::Zero(1)};
  auto r = kkt_residual(prog, z);
  CHECK(r.stationarity[0] == Catch::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("builtin softplus constraints scale curvature by the cubed row norm") {
  // One constraint softplus(a.x - b) - r with ||a|| = 2.
  nlohmann::json params{
      {"n", 2},
      {"m", 1},
      {"Q", {{1.0, 0.0}, {0.0, 1.0}}},
      {"c", {0.0, 0.0}},
      {"A", {{2.0, 0.0}}},
      {"b", {0.0}},
      {"r", {1.0}}};
  auto prog = builtin_problem("quad_softplus", params);
  REQUIRE(prog.Lg.size() == 1);
  CHECK(prog.Lg[0] == Catch::Approx(8.0 * kSoftplusCurvatureRate).epsilon(1e-15));
  CHECK(prog.L0 == 0.0);
}

TEST_CASE("smoothed ball constraints carry the dimension-free curvature rate") {
  auto prog = builtin_problem("smoothed_ball", default_params("smoothed_ball"));
  for (Eigen::Index i = 0; i < prog.m; ++i)
    CHECK(prog.Lg[i] == Catch::Approx(kSmoothedBallCurvatureRate).epsilon(1e-15));
}

TEST_CASE("registry rejects malformed parameter documents") {
  auto base = default_params("quad_softplus");

  SECTION("unknown family") {
    CHECK_THROWS_AS(builtin_problem("nope", {}), std::invalid_argument);
  }
  SECTION("unknown field is named in the error") {
    auto params = base;
    params["extra_knob"] = 1;
    try {
      builtin_problem("quad_softplus", params);
      FAIL("expected a throw");
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).find("extra_knob") != std::string::npos);
    }
  }
  SECTION("indefinite Q is rejected") {
    auto params = base;
    params["Q"] = {{1.0, 0.0}, {0.0, -0.5}};
    CHECK_THROWS_AS(builtin_problem("quad_softplus", params), std::invalid_argument);
  }
  SECTION("asymmetric Q is rejected") {
    auto params = base;
    params["Q"] = {{1.0, 0.5}, {0.0, 1.0}};
    CHECK_THROWS_AS(builtin_problem("quad_softplus", params), std::invalid_argument);
  }
  SECTION("shape mismatch is rejected") {
    auto params = base;
    params["c"] = {1.0, 2.0, 3.0};
    CHECK_THROWS_AS(builtin_problem("quad_softplus", params), std::invalid_argument);
  }
}

TEST_CASE("problem JSON round trip preserves the parameter document") {
  for (const auto& family : builtin_family_names()) {
    auto prog = builtin_problem(family, default_params(family));
    auto doc = problem_to_json(prog);
    auto back = problem_from_json(doc);
    CHECK(back.family == prog.family);
    CHECK(problem_to_json(back) == doc);
    // Oracles rebuilt from the same document agree bitwise.
    std::mt19937_64 rng(7);
    for (int t = 0; t < 20; ++t) {
      auto z = toys::random_point(rng, prog);
      CHECK(prog.f(z.x).value == back.f(z.x).value);
      CHECK(prog.g(z.x).value == back.g(z.x).value);
    }
  }
}

TEST_CASE("derivative oracles match finite differences") {
  std::mt19937_64 rng(11);
  for (const auto& family : builtin_family_names()) {
    auto prog = builtin_problem(family, default_params(family));
    auto check = finite_difference_check(prog, rng, 100, 1.0);
    INFO("family " << family);
    CHECK(check.max_grad_rel_err <= 1e-6);
    CHECK(check.max_hess_rel_err <= 1e-5);
    CHECK(check.max_g_grad_rel_err <= 1e-6);
    CHECK(check.max_g_hess_rel_err <= 1e-5);
  }
}

TEST_CASE("sampled Hessians are positive semidefinite") {
  std::mt19937_64 rng(13);
  for (const auto& family : builtin_family_names()) {
    auto prog = builtin_problem(family, default_params(family));
    INFO("family " << family);
    CHECK(sampled_min_hessian_eigenvalue(prog, rng, 200, 2.0) >= -1e-9);
  }
}

TEST_CASE("sampled Hessian variation stays within the declared moduli") {
  std::mt19937_64 rng(17);
  for (const auto& family : builtin_family_names()) {
    auto prog = builtin_problem(family, default_params(family));
    auto s = sampled_hessian_lipschitz(prog, rng, 200, 2.0);
    INFO("family " << family);
    CHECK(s.max_f_ratio <= prog.L0 + 1e-9);
    REQUIRE(s.max_g_ratio.size() == prog.m);
    for (Eigen::Index i = 0; i < prog.m; ++i)
      CHECK(s.max_g_ratio[i] <= prog.Lg[i] + 1e-9);
  }
}

TEST_CASE("seeded instances with a recorded solution") {
  nlohmann::json params{{"seed", 42}, {"n", 5}, {"m", 4}, {"n_active", 2}};
  auto prog = builtin_problem("known_kkt", params);
  REQUIRE(prog.kkt_point.has_value());
  REQUIRE(prog.suggested_start.has_value());

  SECTION("the recorded point satisfies the optimality system to rounding") {
    auto r = kkt_residual(prog, *prog.kkt_point);
    CHECK(r.stationarity.cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(r.primal_violation.maxCoeff() <= 1e-12);
    CHECK(r.dual_violation.maxCoeff() == 0.0);
    CHECK(r.complementarity_gap <= 1e-12);
  }

  SECTION("active constraints vanish bitwise, inactive ones have margin") {
    auto g = prog.g(prog.kkt_point->x).value;
    int active = 0;
    for (Eigen::Index i = 0; i < prog.m; ++i) {
      if (prog.kkt_point->y[i] > 0.0) {
        CHECK(g[i] == 0.0);
        CHECK(prog.kkt_point->y[i] >= 0.5);
        CHECK(prog.kkt_point->y[i] <= 1.5);
        ++active;
      } else {
        CHECK(g[i] <= -0.35);
      }
    }
    CHECK(active == 2);
  }

  SECTION("construction is deterministic in the seed") {
    auto again = builtin_problem("known_kkt", params);
    CHECK(again.kkt_point->x == prog.kkt_point->x);
    CHECK(again.kkt_point->y == prog.kkt_point->y);
    CHECK(again.suggested_start->x == prog.suggested_start->x);
    auto other = builtin_problem(
        "known_kkt", nlohmann::json{{"seed", 43}, {"n", 5}, {"m", 4}, {"n_active", 2}});
    CHECK(other.kkt_point->x != prog.kkt_point->x);
  }

  SECTION("suggested start is dual-feasible and not the solution") {
    CHECK(prog.suggested_start->y.minCoeff() >= 0.0);
    CHECK((prog.suggested_start->x - prog.kkt_point->x).norm() > 0.1);
  }
}

TEST_CASE("non-finite oracle values raise an evaluation error") {
  auto prog = toys::quad_linear();
  prog.f_oracle = [](const Vec& x) {
    return FEval{std::numeric_limits<double>::infinity(), x, Mat::Identity(1, 1)};
  };
  CHECK_THROWS_AS(prog.f(Vec::Zero(1)), OracleError);
}
