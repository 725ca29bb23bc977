// Command-line front end: solve a registered problem, verify a certificate
// against a problem, or benchmark the bundled constructed instances.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rhpemm/rhpemm.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNotConverged = 3;
constexpr int kExitVerifyFailed = 4;

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("failed to parse '" + path + "': " + e.what());
  }
}

json parse_json_arg(const std::string& text, const std::string& flag) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("failed to parse " + flag + ": " + e.what());
  }
}

struct ProblemArgs {
  std::string name;
  std::string file;
  std::string params_text;

  rhpemm::ConvexProgram load(const json* embedded = nullptr) const {
    if (!file.empty()) return rhpemm::problem_from_json(load_json_file(file));
    if (!name.empty()) {
      json params = json::object();
      if (!params_text.empty()) params = parse_json_arg(params_text, "--params");
      return rhpemm::builtin_problem(name, params);
    }
    if (embedded && embedded->is_object()) return rhpemm::problem_from_json(*embedded);
    throw std::runtime_error("no problem given: use --problem or --problem-file");
  }
};

struct SolveArgs {
  ProblemArgs problem;
  std::string config_file;
  std::string out_dir = ".";
  std::optional<double> sigma, theta, delta, eps, lambda1, d0;
  std::optional<long> max_iters;
  std::optional<std::uint64_t> seed;
};

rhpemm::SolverConfig build_config(const SolveArgs& a) {
  rhpemm::SolverConfig cfg;
  if (!a.config_file.empty()) {
    json doc = load_json_file(a.config_file);
    if (doc.contains("sigma")) cfg.sigma = doc.at("sigma").get<double>();
    if (doc.contains("theta")) cfg.theta = doc.at("theta").get<double>();
    if (doc.contains("delta")) cfg.delta_tol = doc.at("delta").get<double>();
    if (doc.contains("eps")) cfg.eps_tol = doc.at("eps").get<double>();
    if (doc.contains("max_iters")) cfg.max_iters = doc.at("max_iters").get<long>();
    if (doc.contains("seed")) cfg.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("lambda1")) cfg.lambda1 = doc.at("lambda1").get<double>();
    if (doc.contains("inner_abs_floor"))
      cfg.inner_abs_floor = doc.at("inner_abs_floor").get<double>();
    if (doc.contains("inner_kappa")) cfg.inner_kappa = doc.at("inner_kappa").get<double>();
  }
  if (a.sigma) cfg.sigma = *a.sigma;
  if (a.theta) cfg.theta = *a.theta;
  if (a.delta) cfg.delta_tol = *a.delta;
  if (a.eps) cfg.eps_tol = *a.eps;
  if (a.max_iters) cfg.max_iters = *a.max_iters;
  if (a.seed) cfg.seed = *a.seed;
  if (a.lambda1) cfg.lambda1 = *a.lambda1;
  return cfg;
}

json config_to_json(const rhpemm::SolverConfig& cfg) {
  json j{{"sigma", cfg.sigma},
         {"theta", cfg.theta},
         {"delta", cfg.delta_tol},
         {"eps", cfg.eps_tol},
         {"max_iters", cfg.max_iters},
         {"seed", cfg.seed},
         {"inner_abs_floor", cfg.inner_abs_floor},
         {"inner_kappa", cfg.inner_kappa}};
  j["lambda1"] = cfg.lambda1 ? json(*cfg.lambda1) : json(nullptr);
  return j;
}

json budget_to_json(const rhpemm::ComplexityBudget& b, double d0) {
  return {{"d0", d0},
          {"c", b.c},
          {"eta", b.eta},
          {"rho_bar", b.rho_bar},
          {"pointwise_budget", b.pointwise_budget},
          {"ergodic_budget", b.ergodic_budget}};
}

rhpemm::PrimalDual default_start(const rhpemm::ConvexProgram& prog) {
  if (prog.suggested_start) return *prog.suggested_start;
  return rhpemm::PrimalDual::Zero(prog.n, prog.m);
}

std::optional<double> slope_or_none(const std::vector<double>& values) {
  long hi = std::min<long>(100, static_cast<long>(values.size()));
  if (hi < 12) return std::nullopt;
  try {
    return rhpemm::fit_loglog_slope(values, 10, hi);
  } catch (const std::invalid_argument&) {
    return std::nullopt;
  }
}

int cmd_solve(const SolveArgs& args) {
  rhpemm::ConvexProgram prog = args.problem.load();
  rhpemm::SolverConfig cfg = build_config(args);
  if (prog.kkt_point) cfg.reference_solution = prog.kkt_point;

  rhpemm::PrimalDual z0 = default_start(prog);
  rhpemm::SolveResult res = rhpemm::run(prog, z0, cfg);

  fs::create_directories(args.out_dir);
  {
    std::ofstream trace(fs::path(args.out_dir) / "trace.csv");
    rhpemm::write_trace_csv(trace, res.trace);
  }

  json report;
  report["problem"] = rhpemm::problem_to_json(prog);
  report["config"] = config_to_json(cfg);
  report["derived"] = {{"lambda1", res.lambda1}, {"tau", res.tau}, {"h", res.h}};
  report["result"] = {{"converged", res.converged},
                      {"termination", res.termination},
                      {"iterations", res.iterations},
                      {"extragradient_steps", res.count_A},
                      {"model_solves", res.count_B},
                      {"final_lambda", res.final_lambda},
                      {"pointwise_score", res.pointwise_score},
                      {"ergodic_score", res.ergodic_score},
                      {"monitor_violations", res.monitor_violations}};
  report["certificates"] = json::object();
  report["certificates"]["pointwise"] =
      res.pointwise ? rhpemm::certificate_to_json(*res.pointwise) : json(nullptr);
  report["certificates"]["ergodic"] =
      res.ergodic ? rhpemm::certificate_to_json(*res.ergodic) : json(nullptr);

  if (res.budget) {
    report["budget"] = budget_to_json(*res.budget, res.d0);
  } else if (args.d0) {
    rhpemm::Relaxation rel = rhpemm::derive_relaxation(cfg.sigma, cfg.theta);
    rhpemm::ComplexityBudget bud =
        rhpemm::complexity_budget(prog, *args.d0, z0.y, res.lambda1, cfg.sigma,
                                  cfg.theta, rel.tau, cfg.delta_tol, cfg.eps_tol);
    report["budget"] = budget_to_json(bud, *args.d0);
  } else {
    report["budget"] = json(nullptr);
  }
  report["trace_file"] = "trace.csv";

  std::ofstream out(fs::path(args.out_dir) / "report.json");
  out << report.dump(2) << "\n";
  out.close();

  std::cout << (res.converged ? "converged" : "not converged") << " ("
            << res.termination << ") after " << res.iterations
            << " iterations; best ||(p,q)|| = "
            << (res.pointwise ? res.pointwise->pq_norm : 0.0) << "\n";
  return res.converged ? kExitOk : kExitNotConverged;
}

int cmd_verify(const ProblemArgs& problem, const std::string& cert_file, double tol) {
  json doc = load_json_file(cert_file);
  const json* embedded = doc.contains("problem") ? &doc.at("problem") : nullptr;
  rhpemm::ConvexProgram prog = problem.load(embedded);

  std::vector<std::pair<std::string, json>> certs;
  if (doc.contains("certificates")) {
    for (auto& [key, value] : doc.at("certificates").items())
      if (value.is_object()) certs.emplace_back(key, value);
  } else if (doc.contains("type")) {
    certs.emplace_back(doc.at("type").get<std::string>(), doc);
  } else {
    throw std::runtime_error("certificate file has neither 'certificates' nor 'type'");
  }
  if (certs.empty()) throw std::runtime_error("no certificates found in file");

  bool all_ok = true;
  for (auto& [label, cert] : certs) {
    try {
      rhpemm::verify_certificate_json(prog, cert, tol);
      std::cout << label << ": OK (||(p,q)|| = " << cert.at("pq_norm").get<double>()
                << ", eps = " << cert.at("eps").get<double>() << ")\n";
    } catch (const rhpemm::CertificateError& e) {
      all_ok = false;
      std::cout << label << ": FAILED relation '" << e.relation << "': " << e.what()
                << "\n";
    }
  }
  return all_ok ? kExitOk : kExitVerifyFailed;
}

struct BenchArgs {
  std::string out_dir = ".";
  double delta = 1e-6;
  double eps = 1e-6;
  long max_iters = 5000;
};

int cmd_bench(const BenchArgs& args) {
  struct Instance {
    std::uint64_t seed;
    long n, m, n_active;
  };
  const std::vector<Instance> instances = {{0, 3, 3, 2}, {1, 4, 3, 1}, {2, 5, 4, 3}};

  fs::create_directories(args.out_dir);
  std::ofstream csv(fs::path(args.out_dir) / "bench.csv");
  csv << "family,seed,n,m,d0,c,eta,rho_bar,pointwise_budget,ergodic_budget,"
         "iterations,extragradient_steps,model_solves,converged,termination,"
         "within_budget,pointwise_slope,ergodic_slope\n";

  bool all_ok = true;
  char buf[640];
  for (const Instance& inst : instances) {
    json params{{"seed", inst.seed}, {"n", inst.n}, {"m", inst.m}, {"n_active", inst.n_active}};
    rhpemm::ConvexProgram prog = rhpemm::builtin_problem("known_kkt", params);
    rhpemm::SolverConfig cfg;
    cfg.delta_tol = args.delta;
    cfg.eps_tol = args.eps;
    cfg.max_iters = args.max_iters;
    cfg.reference_solution = prog.kkt_point;
    rhpemm::PrimalDual z0 = *prog.suggested_start;
    rhpemm::SolveResult res = rhpemm::run(prog, z0, cfg);

    bool within = res.budget && res.converged &&
                  res.iterations <= res.budget->pointwise_budget;
    all_ok = all_ok && within && res.monitor_violations.empty();

    // pointwise decay: best ||v|| among the first i extragradient steps
    std::vector<double> pointwise_best;
    double best = std::numeric_limits<double>::infinity();
    for (const rhpemm::HpeRecord& r : res.records) {
      best = std::min(best, r.v.norm());
      pointwise_best.push_back(best);
    }
    std::optional<double> pw_slope = slope_or_none(pointwise_best);
    std::optional<double> erg_slope = slope_or_none(res.ergodic_v_norms);

    std::snprintf(buf, sizeof(buf),
                  "known_kkt,%llu,%ld,%ld,%.17g,%.17g,%.17g,%.17g,%lld,%lld,%ld,%ld,%ld,"
                  "%d,%s,%d,%s,%s\n",
                  static_cast<unsigned long long>(inst.seed), inst.n, inst.m, res.d0,
                  res.budget->c, res.budget->eta, res.budget->rho_bar,
                  res.budget->pointwise_budget, res.budget->ergodic_budget,
                  res.iterations, res.count_A, res.count_B, res.converged ? 1 : 0,
                  res.termination.c_str(), within ? 1 : 0,
                  pw_slope ? std::to_string(*pw_slope).c_str() : "",
                  erg_slope ? std::to_string(*erg_slope).c_str() : "");
    csv << buf;
    std::cout << "known_kkt seed " << inst.seed << ": " << res.iterations
              << " iterations (budget " << res.budget->pointwise_budget << "), "
              << (within ? "within budget" : "OVER BUDGET") << "\n";
  }
  return all_ok ? kExitOk : kExitVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"primal-dual proximal extragradient solver for smooth convex programs"};
  app.require_subcommand(1);

  SolveArgs solve_args;
  CLI::App* solve = app.add_subcommand("solve", "solve a problem and write report.json + trace.csv");
  solve->add_option("--problem", solve_args.problem.name, "builtin problem family");
  solve->add_option("--problem-file", solve_args.problem.file, "problem JSON file");
  solve->add_option("--params", solve_args.problem.params_text, "JSON overrides for family params");
  solve->add_option("--config", solve_args.config_file, "solver config JSON file");
  solve->add_option("--sigma", solve_args.sigma, "relative error parameter in (0,1)");
  solve->add_option("--theta", solve_args.theta, "localization parameter in (0,1/4]");
  solve->add_option("--delta", solve_args.delta, "target on ||(p,q)||");
  solve->add_option("--eps", solve_args.eps, "target on eps");
  solve->add_option("--max-iters", solve_args.max_iters, "iteration cap");
  solve->add_option("--seed", solve_args.seed, "rng seed echoed into the report");
  solve->add_option("--lambda1", solve_args.lambda1, "initial stepsize override");
  solve->add_option("--d0", solve_args.d0, "distance estimate for budget reporting");
  solve->add_option("--out", solve_args.out_dir, "output directory");

  ProblemArgs verify_problem;
  std::string cert_file;
  double verify_tol = 1e-9;
  CLI::App* verify = app.add_subcommand("verify", "re-verify certificates against a problem");
  verify->add_option("--certificate", cert_file, "certificate or report JSON file")->required();
  verify->add_option("--problem", verify_problem.name, "builtin problem family");
  verify->add_option("--problem-file", verify_problem.file, "problem JSON file");
  verify->add_option("--params", verify_problem.params_text, "JSON overrides for family params");
  verify->add_option("--tol", verify_tol, "verification tolerance");

  BenchArgs bench_args;
  CLI::App* bench = app.add_subcommand("bench", "run the bundled constructed instances");
  bench->add_option("--delta", bench_args.delta, "target on ||(p,q)||");
  bench->add_option("--eps", bench_args.eps, "target on eps");
  bench->add_option("--max-iters", bench_args.max_iters, "iteration cap");
  bench->add_option("--out", bench_args.out_dir, "output directory");

  try {
    app.parse(argc, argv);
    if (solve->parsed()) return cmd_solve(solve_args);
    if (verify->parsed()) return cmd_verify(verify_problem, cert_file, verify_tol);
    if (bench->parsed()) return cmd_bench(bench_args);
    return kExitError;
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}
