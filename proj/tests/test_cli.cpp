// End-to-end checks of the command line binary. Run with the binary path as
// argv[1]; each case shells out and inspects exit codes and written files.

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int g_failures = 0;

void report(const std::string& name, bool ok, const std::string& detail = "") {
  std::cout << (ok ? "ok   " : "FAIL ") << name;
  if (!ok && !detail.empty()) std::cout << "  [" << detail << "]";
  std::cout << "\n";
  if (!ok) ++g_failures;
}

struct RunResult {
  int exit_code = -1;
  std::string output;
};

RunResult run_cmd(const std::string& cli, const std::string& args,
                  const std::string& log_name) {
  std::string cmd = cli + " " + args + " > " + log_name + " 2>&1";
  int rc = std::system(cmd.c_str());
  RunResult out;
  if (rc == -1)
    out.exit_code = -1;
  else if (WIFEXITED(rc))
    out.exit_code = WEXITSTATUS(rc);
  else
    out.exit_code = 128;
  std::ifstream in(log_name);
  std::stringstream ss;
  ss << in.rdbuf();
  out.output = ss.str();
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool contains(const std::string& hay, const std::string& needle) {
  return hay.find(needle) != std::string::npos;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: test_cli <path-to-cli>\n";
    return 2;
  }
  const std::string cli = argv[1];
  const fs::path work = fs::current_path() / "cli_work";
  fs::remove_all(work);
  fs::create_directories(work);
  auto in_work = [&](const std::string& name) { return (work / name).string(); };

  // Converging solve writes a complete report and trace.
  {
    RunResult r = run_cmd(cli,
                          "solve --problem known_kkt --delta 1e-6 --eps 1e-6 --out " +
                              in_work("d1"),
                          in_work("solve1.log"));
    bool ok = r.exit_code == 0;
    json report_doc;
    std::string detail = "exit " + std::to_string(r.exit_code);
    if (ok) {
      try {
        report_doc = json::parse(slurp(work / "d1" / "report.json"));
        ok = report_doc.at("result").at("converged").get<bool>() &&
             report_doc.at("result").at("monitor_violations").empty() &&
             report_doc.contains("budget") && !report_doc.at("budget").is_null() &&
             report_doc.at("result").at("iterations").get<long>() <=
                 report_doc.at("budget").at("pointwise_budget").get<long>() &&
             report_doc.at("certificates").contains("pointwise");
        if (!ok) detail = "report fields";
      } catch (const std::exception& e) {
        ok = false;
        detail = e.what();
      }
    }
    if (ok) {
      std::string trace = slurp(work / "d1" / "trace.csv");
      ok = trace.rfind("k,branch,lambda,", 0) == 0 && trace.find('\n') != std::string::npos;
      if (!ok) detail = "trace.csv";
    }
    report("solve converges and writes report + trace", ok, detail);
  }

  // Same invocation twice gives byte-identical reports.
  {
    const std::string args = "solve --problem known_kkt --delta 1e-6 --eps 1e-6 --out ";
    RunResult r2 = run_cmd(cli, args + in_work("d2"), in_work("solve2.log"));
    RunResult r3 = run_cmd(cli, args + in_work("d3"), in_work("solve3.log"));
    bool ok = r2.exit_code == 0 && r3.exit_code == 0;
    if (ok) {
      std::string a = slurp(work / "d2" / "report.json");
      std::string b = slurp(work / "d3" / "report.json");
      ok = !a.empty() && a == b;
    }
    report("repeated solve is byte-identical", ok);
  }

  // Iteration cap reached: exit 3 but still a valid partial report.
  {
    RunResult r = run_cmd(cli,
                          "solve --problem quad_softplus --max-iters 2 --out " +
                              in_work("d4"),
                          in_work("solve4.log"));
    bool ok = r.exit_code == 3;
    std::string detail = "exit " + std::to_string(r.exit_code);
    if (ok) {
      try {
        json doc = json::parse(slurp(work / "d4" / "report.json"));
        ok = !doc.at("result").at("converged").get<bool>() &&
             doc.at("result").at("termination") == "max_iters" &&
             doc.at("result").at("iterations").get<long>() == 2;
        if (!ok) detail = "report fields";
      } catch (const std::exception& e) {
        ok = false;
        detail = e.what();
      }
    }
    report("iteration cap exits 3 with partial report", ok, detail);
  }

  // Malformed problem file is a clean error.
  {
    std::ofstream bad(work / "bad.json");
    bad << "{ not json";
    bad.close();
    RunResult r = run_cmd(cli, "solve --problem-file " + in_work("bad.json"),
                          in_work("solve5.log"));
    report("malformed problem file exits 1",
           r.exit_code == 1 && contains(r.output, "failed to parse"),
           "exit " + std::to_string(r.exit_code));
  }

  // Unknown parameter fields are rejected by name.
  {
    std::ofstream f(work / "bogus.json");
    f << R"({"family":"quad_softplus","params":{"bogus":1}})";
    f.close();
    RunResult r = run_cmd(cli, "solve --problem-file " + in_work("bogus.json"),
                          in_work("solve6.log"));
    report("unknown problem field exits 1 naming the field",
           r.exit_code == 1 && contains(r.output, "unknown field 'bogus'"),
           "exit " + std::to_string(r.exit_code));
  }

  // verify accepts the report it just produced (problem embedded in report).
  {
    RunResult r = run_cmd(cli, "verify --certificate " + in_work("d1/report.json"),
                          in_work("verify1.log"));
    report("verify accepts a fresh report",
           r.exit_code == 0 && contains(r.output, ": OK ("),
           "exit " + std::to_string(r.exit_code));
  }

  // Tampered certificate fails with the violated relation named.
  {
    json doc = json::parse(slurp(work / "d1" / "report.json"));
    doc["certificates"]["pointwise"]["p"][0] =
        doc["certificates"]["pointwise"]["p"][0].get<double>() + 1e-3;
    std::ofstream f(work / "tampered.json");
    f << doc.dump(2);
    f.close();
    RunResult r = run_cmd(cli, "verify --certificate " + in_work("tampered.json"),
                          in_work("verify2.log"));
    report("tampered certificate exits 4 naming stationarity",
           r.exit_code == 4 && contains(r.output, "stationarity"),
           "exit " + std::to_string(r.exit_code));
  }

  // Certificates do not transfer to a different instance.
  {
    RunResult r = run_cmd(cli,
                          "verify --certificate " + in_work("d1/report.json") +
                              " --problem known_kkt --params '{\"seed\":5}'",
                          in_work("verify3.log"));
    report("verify against a different instance exits 4",
           r.exit_code == 4 && contains(r.output, "FAILED relation"),
           "exit " + std::to_string(r.exit_code));
  }

  // bench writes one csv row per instance and stays within budget.
  {
    RunResult r = run_cmd(cli, "bench --out " + in_work("d6"), in_work("bench.log"));
    bool ok = r.exit_code == 0 && contains(r.output, "within budget");
    std::string detail = "exit " + std::to_string(r.exit_code);
    if (ok) {
      std::string csv = slurp(work / "d6" / "bench.csv");
      long lines = 0;
      for (char c : csv)
        if (c == '\n') ++lines;
      ok = lines == 4 && csv.rfind("family,seed,n,m,", 0) == 0;
      if (!ok) detail = "bench.csv had " + std::to_string(lines) + " lines";
    }
    report("bench runs the bundled instances within budget", ok, detail);
  }

  // No subcommand is a usage error.
  {
    RunResult r = run_cmd(cli, "", in_work("usage.log"));
    report("missing subcommand is a nonzero exit", r.exit_code != 0,
           "exit " + std::to_string(r.exit_code));
  }

  // solve without a problem is a clean error.
  {
    RunResult r = run_cmd(cli, "solve --out " + in_work("d7"), in_work("solve7.log"));
    report("solve without a problem exits 1",
           r.exit_code == 1 && contains(r.output, "no problem given"),
           "exit " + std::to_string(r.exit_code));
  }

  if (g_failures == 0) std::cout << "all cli checks passed\n";
  return g_failures == 0 ? 0 : 1;
}
