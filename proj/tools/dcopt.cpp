// Command-line front end: run, verify, oracle and report.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "dcopt/experiment.hpp"
#include "dcopt/trajectory_io.hpp"
#include "dcopt/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dcopt;

namespace {

enum ExitCode {
  kOk = 0,
  kCheckFailed = 1,
  kUsage = 2,
  kPrecondition = 3,
  kIntegration = 4,
  kInternal = 5,
};

int Fail(int code, const std::string& kind, const std::string& message,
         json extra = json::object()) {
  json err = {{"error", kind}, {"message", message}};
  err.update(extra);
  std::cerr << err.dump() << '\n';
  return code;
}

// A built-in name or a path to a config file.
ExperimentConfig ResolveConfig(const std::string& spec) {
  if (auto builtin = BuiltinConfig(spec)) return *builtin;
  if (!fs::exists(spec)) {
    throw std::invalid_argument("'" + spec +
                                "' is neither a built-in experiment nor a config file");
  }
  return LoadConfig(spec);
}

json ReportOracle(const Experiment& exp) {
  json j = {{"s_star", std::vector<double>(exp.oracle.point.data(),
                                           exp.oracle.point.data() + exp.oracle.point.size())},
            {"value", exp.oracle.value},
            {"gradient_norm", exp.oracle.gradient_norm},
            {"xi", std::vector<double>(exp.xi.data(), exp.xi.data() + exp.xi.size())},
            {"balanced", IsBalanced(exp.graph)}};
  if (exp.graph.size() > 1) {
    j["certificate"] = ToJson(exp.certificate);
    j["constants"] = ToJson(ComputeLyapunovConstants(exp.certificate, exp.costs,
                                                     exp.xi.minCoeff(), exp.graph.size()));
  }
  return j;
}

int CmdRun(const std::string& spec, const std::string& out_override) {
  ExperimentConfig cfg = ResolveConfig(spec);
  if (!out_override.empty()) cfg.output_dir = out_override;
  const RunResult run = RunExperiment(cfg);
  fs::path dir = cfg.output_dir;
  if (dir.is_relative() && !cfg.base_dir.empty()) dir = cfg.base_dir / dir;
  WriteRunOutputs(run, dir);
  const auto& f = run.report.final;
  std::cout << json{{"output_dir", dir.string()},
                    {"final", ToJson(f)},
                    {"records", run.trajectory.records.size()}}
                   .dump(2)
            << '\n';
  return kOk;
}

int CmdVerify(const std::string& spec, std::uint64_t seed) {
  const Experiment exp = BuildExperiment(ResolveConfig(spec));
  VerifyOptions opts;
  opts.seed = seed;
  const auto checks = RunVerification(exp, opts);
  json list = json::array();
  bool all = true;
  for (const auto& c : checks) {
    all = all && c.ok;
    list.push_back({{"check", c.name},
                    {"ok", c.ok},
                    {"value", c.value},
                    {"comparison", c.comparison},
                    {"threshold", c.threshold},
                    {"detail", c.detail}});
  }
  std::cout << json{{"passed", all}, {"checks", list}}.dump(2) << '\n';
  return all ? kOk : kCheckFailed;
}

int CmdOracle(const std::string& spec) {
  const Experiment exp = BuildExperiment(ResolveConfig(spec));
  std::cout << ReportOracle(exp).dump(2) << '\n';
  return kOk;
}

// Recomputes metrics from a saved trajectory and compares them with the
// stored columns. The experiment comes from the report.json next to the CSV
// unless --config is given.
int CmdReport(const std::string& target, const std::string& config_override) {
  fs::path csv = target;
  if (fs::is_directory(csv)) csv /= "trajectory.csv";
  std::ifstream in(csv);
  if (!in) throw std::invalid_argument("cannot open " + csv.string());
  const TrajectoryTable table = ReadTrajectoryCsv(in);

  ExperimentConfig cfg;
  if (!config_override.empty()) {
    cfg = ResolveConfig(config_override);
  } else {
    const fs::path sidecar = csv.parent_path() / "report.json";
    std::ifstream rj(sidecar);
    if (!rj) {
      throw std::invalid_argument("no report.json next to " + csv.string() +
                                  "; pass --config");
    }
    cfg = ParseConfig(json::parse(rj).at("config").get<std::string>(),
                      csv.parent_path());
  }
  const Experiment exp = BuildExperiment(cfg);
  const auto states = RebuildStates(table, exp.laplacian);
  const TrajectoryReport rep = MakeTrajectoryReport(
      states, states.back(), exp.oracle.point, exp.xi, exp.costs, exp.graph);

  double mismatch = 0.0;
  for (std::size_t r = 0; r < states.size(); ++r) {
    mismatch = std::max({mismatch,
                         std::abs(rep.series.consensus_error[r] - table.consensus_error[r]),
                         std::abs(rep.series.optimality_residual[r] -
                                  table.optimality_residual[r]),
                         std::abs(rep.series.w_error[r] - table.w_error[r])});
  }
  json out = {{"records", states.size()},
              {"final", ToJson(rep.final)},
              {"series", ToJson(rep.series)},
              {"max_stored_metric_mismatch", mismatch}};
  if (cfg.costs == "example2") {
    const Eigen::VectorXd e = PerCoordinateError(states.back(), cfg.mu);
    out["per_coordinate_error"] = std::vector<double>(e.data(), e.data() + e.size());
  }
  std::cout << out.dump(2) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive distributed optimization over unbalanced digraphs"};
  app.require_subcommand(1);

  std::string spec, out_dir, target, config_override;
  std::uint64_t seed = 7;

  auto* run = app.add_subcommand("run", "simulate and write trajectory.csv, report.json");
  run->add_option("config", spec, "example1 | example2 | config file")->required();
  run->add_option("-o,--output-dir", out_dir, "override output_dir");

  auto* verify = app.add_subcommand("verify", "run the oracle and property checks");
  verify->add_option("config", spec, "example1 | example2 | config file")->required();
  verify->add_option("--seed", seed, "sampling seed");

  auto* oracle = app.add_subcommand("oracle", "print s*, xi and the spectral certificate");
  oracle->add_option("config", spec, "example1 | example2 | config file")->required();

  auto* report = app.add_subcommand("report", "recompute metrics from a saved trajectory");
  report->add_option("trajectory", target, "trajectory.csv or its directory")->required();
  report->add_option("--config", config_override, "experiment the trajectory came from");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << app.help();
    return Fail(kUsage, "usage", e.what());
  }

  try {
    if (run->parsed()) return CmdRun(spec, out_dir);
    if (verify->parsed()) return CmdVerify(spec, seed);
    if (oracle->parsed()) return CmdOracle(spec);
    if (report->parsed()) return CmdReport(target, config_override);
  } catch (const PreconditionError& e) {
    return Fail(kPrecondition, "precondition", e.what(),
                {{"precondition", "strong_connectivity"}});
  } catch (const IntegrationFault& e) {
    return Fail(kIntegration, "integration_fault", e.what(),
                {{"agent", e.agent() + 1}, {"time", e.time()}});
  } catch (const std::invalid_argument& e) {
    std::cerr << app.help();
    return Fail(kUsage, "config", e.what());
  } catch (const std::exception& e) {
    return Fail(kInternal, "internal", e.what());
  }
  return kInternal;
}
