#include "dcopt/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "dcopt/random.hpp"

namespace dcopt {

namespace {

std::string Trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<double> ParseNumbers(const std::string& key, const std::string& value) {
  std::istringstream in(value);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) {
    std::size_t used = 0;
    double d;
    try {
      d = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size()) {
      throw std::invalid_argument("config key '" + key + "': '" + tok +
                                  "' is not a number");
    }
    out.push_back(d);
  }
  return out;
}

double ParseScalar(const std::string& key, const std::string& value) {
  const auto v = ParseNumbers(key, value);
  if (v.size() != 1) {
    throw std::invalid_argument("config key '" + key + "' expects one number");
  }
  return v.front();
}

long long ParseInteger(const std::string& key, const std::string& value) {
  const double d = ParseScalar(key, value);
  if (d != std::floor(d) || std::abs(d) > 9.0e15) {
    throw std::invalid_argument("config key '" + key + "' expects an integer");
  }
  return static_cast<long long>(d);
}

std::vector<Eigen::VectorXd> ParseBlocks(const std::string& key,
                                         const std::string& value) {
  std::vector<Eigen::VectorXd> out;
  std::istringstream in(value);
  std::string block;
  while (std::getline(in, block, ';')) {
    if (Trim(block).empty()) continue;
    const auto nums = ParseNumbers(key, block);
    out.push_back(Eigen::Map<const Eigen::VectorXd>(nums.data(),
                                                    static_cast<Eigen::Index>(nums.size())));
  }
  if (out.empty()) throw std::invalid_argument("config key '" + key + "' is empty");
  return out;
}

std::string Num(double d) {
  std::ostringstream out;
  out.precision(17);
  out << d;
  return out.str();
}

std::string Join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + Num(v[i]);
  return s;
}

std::string JoinBlocks(const std::vector<Eigen::VectorXd>& blocks) {
  std::string s;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (i) s += "; ";
    s += Join(std::vector<double>(blocks[i].data(), blocks[i].data() + blocks[i].size()));
  }
  return s;
}

}  // namespace

std::string ExperimentConfig::ToText() const {
  std::ostringstream out;
  out << "graph = " << graph << '\n';
  out << "costs = " << costs << '\n';
  for (const auto& [scale, center] : quadratics) {
    std::vector<double> row{scale};
    row.insert(row.end(), center.data(), center.data() + center.size());
    out << "quadratic = " << Join(row) << '\n';
  }
  out << "n = " << n << '\n';
  out << "seed = " << seed << '\n';
  out << "step = " << Num(integrator.step) << '\n';
  out << "t_end = " << Num(integrator.t_end) << '\n';
  out << "stride = " << integrator.record_stride << '\n';
  out << "min_step = " << Num(integrator.min_step) << '\n';
  out << "sigma0 = " << Join(sigma0) << '\n';
  out << "init_range = " << Num(init_lo) << ' ' << Num(init_hi) << '\n';
  if (x0) out << "x0 = " << JoinBlocks(*x0) << '\n';
  if (v0) out << "v0 = " << JoinBlocks(*v0) << '\n';
  out << "mu = " << Join(mu) << '\n';
  out << "huber_tolerance = " << Num(huber_tolerance) << '\n';
  out << "covariance_scale = " << Num(covariance_scale) << '\n';
  out << "samples_per_sensor = " << samples_per_sensor << '\n';
  out << "oracle_grid = " << Num(oracle_lo) << ' ' << Num(oracle_hi) << ' '
      << oracle_per_axis << '\n';
  out << "output_dir = " << output_dir << '\n';
  return out.str();
}

ExperimentConfig ParseConfig(const std::string& text,
                             const std::filesystem::path& base_dir) {
  ExperimentConfig cfg;
  cfg.base_dir = base_dir;
  bool quadratics_seen = false;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected `key = value`");
    }
    const std::string key = Trim(line.substr(0, eq));
    const std::string value = Trim(line.substr(eq + 1));

    if (key == "graph") {
      cfg.graph = value;
    } else if (key == "costs") {
      cfg.costs = value;
    } else if (key == "quadratic") {
      if (!quadratics_seen) cfg.quadratics.clear();
      quadratics_seen = true;
      const auto nums = ParseNumbers(key, value);
      if (nums.size() < 2) {
        throw std::invalid_argument("quadratic expects `scale c_1 ... c_n`");
      }
      cfg.quadratics.emplace_back(
          nums.front(), Eigen::Map<const Eigen::VectorXd>(
                            nums.data() + 1, static_cast<Eigen::Index>(nums.size() - 1)));
    } else if (key == "n") {
      cfg.n = static_cast<int>(ParseInteger(key, value));
    } else if (key == "seed") {
      const long long s = ParseInteger(key, value);
      if (s < 0) throw std::invalid_argument("seed must be >= 0");
      cfg.seed = static_cast<std::uint64_t>(s);
    } else if (key == "step") {
      cfg.integrator.step = ParseScalar(key, value);
    } else if (key == "t_end") {
      cfg.integrator.t_end = ParseScalar(key, value);
    } else if (key == "stride") {
      cfg.integrator.record_stride = static_cast<int>(ParseInteger(key, value));
    } else if (key == "min_step") {
      cfg.integrator.min_step = ParseScalar(key, value);
    } else if (key == "sigma0") {
      cfg.sigma0 = ParseNumbers(key, value);
    } else if (key == "init_range") {
      const auto r = ParseNumbers(key, value);
      if (r.size() != 2 || !(r[0] < r[1])) {
        throw std::invalid_argument("init_range expects `lo hi` with lo < hi");
      }
      cfg.init_lo = r[0];
      cfg.init_hi = r[1];
    } else if (key == "x0") {
      cfg.x0 = ParseBlocks(key, value);
    } else if (key == "v0") {
      cfg.v0 = ParseBlocks(key, value);
    } else if (key == "mu") {
      cfg.mu = ParseNumbers(key, value);
    } else if (key == "huber_tolerance") {
      cfg.huber_tolerance = ParseScalar(key, value);
    } else if (key == "covariance_scale") {
      cfg.covariance_scale = ParseScalar(key, value);
    } else if (key == "samples_per_sensor") {
      cfg.samples_per_sensor = static_cast<int>(ParseInteger(key, value));
    } else if (key == "oracle_grid") {
      const auto g = ParseNumbers(key, value);
      if (g.size() != 3 || !(g[0] < g[1]) || g[2] < 1 || g[2] != std::floor(g[2])) {
        throw std::invalid_argument("oracle_grid expects `lo hi per_axis`");
      }
      cfg.oracle_lo = g[0];
      cfg.oracle_hi = g[1];
      cfg.oracle_per_axis = static_cast<int>(g[2]);
    } else if (key == "output_dir") {
      cfg.output_dir = value;
    } else {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": unknown key '" + key + "'");
    }
  }
  cfg.integrator.Validate();
  if (cfg.n <= 0) throw std::invalid_argument("n must be positive");
  for (double s : cfg.sigma0) {
    if (!(s > 0.0)) throw std::invalid_argument("sigma0 entries must be positive");
  }
  if (cfg.sigma0.empty()) throw std::invalid_argument("sigma0 is empty");
  return cfg;
}

ExperimentConfig LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return ParseConfig(buf.str(), path.parent_path());
}

ExperimentConfig Example1Config() {
  ExperimentConfig cfg;
  cfg.graph = "fig1";
  cfg.costs = "example1";
  cfg.n = 2;
  cfg.seed = 1;
  cfg.integrator.step = 1e-3;
  cfg.integrator.t_end = 100.0;
  cfg.integrator.record_stride = 100;
  cfg.sigma0 = {1.0};
  cfg.output_dir = "out/example1";
  return cfg;
}

ExperimentConfig Example2Config() {
  ExperimentConfig cfg;
  cfg.graph = "fig1";
  cfg.costs = "example2";
  cfg.n = 3;
  cfg.seed = 1;
  // The Huber sums carry ~500 unit-curvature terms and are divided by
  // w_i^i -> xi_i (min 1/11 on fig1), so the gradient term has rates near
  // 5500; RK4 is stable for h * rate below ~2.78.
  cfg.integrator.step = 2e-4;
  cfg.integrator.t_end = 100.0;
  cfg.integrator.record_stride = 500;
  cfg.integrator.min_step = 1e-8;
  cfg.sigma0 = {1.0};
  cfg.mu = {1.0, 2.0, 3.0};
  cfg.huber_tolerance = 0.5;
  cfg.covariance_scale = 0.01;
  cfg.samples_per_sensor = 500;
  cfg.output_dir = "out/example2";
  return cfg;
}

std::optional<ExperimentConfig> BuiltinConfig(const std::string& name) {
  if (name == "example1") return Example1Config();
  if (name == "example2") return Example2Config();
  return std::nullopt;
}

std::vector<HuberSpec> GenerateGaussianData(std::uint64_t seed,
                                            const std::vector<double>& mu,
                                            const std::vector<double>& scales,
                                            int count, double tolerance) {
  if (count <= 0) throw std::invalid_argument("sample count must be positive");
  if (mu.empty()) throw std::invalid_argument("mean vector is empty");
  PortableRng rng(seed);
  std::vector<HuberSpec> out;
  for (double scale : scales) {
    if (!(scale > 0.0)) throw std::invalid_argument("covariance scales must be > 0");
    const double sd = std::sqrt(scale);
    HuberSpec spec;
    spec.tolerance = tolerance;
    spec.data.reserve(count);
    for (int j = 0; j < count; ++j) {
      Eigen::VectorXd q(mu.size());
      for (std::size_t k = 0; k < mu.size(); ++k) q(k) = mu[k] + sd * rng.Normal();
      spec.data.push_back(std::move(q));
    }
    out.push_back(std::move(spec));
  }
  return out;
}

std::uint64_t InitStreamSeed(std::uint64_t seed) {
  return seed ^ 0x9E3779B97F4A7C15ULL;
}

namespace {

Digraph ResolveGraph(const ExperimentConfig& cfg) {
  if (cfg.graph == "fig1") return Fig1Digraph();
  if (cfg.graph.rfind("cycle:", 0) == 0) {
    const long long n = ParseInteger("graph", cfg.graph.substr(6));
    if (n < 1) throw std::invalid_argument("cycle size must be positive");
    return SymmetricCycle(static_cast<int>(n));
  }
  std::filesystem::path p(cfg.graph);
  if (p.is_relative() && !cfg.base_dir.empty()) p = cfg.base_dir / p;
  return Digraph::FromEdgeListFile(p);
}

}  // namespace

Experiment BuildExperiment(const ExperimentConfig& config) {
  Experiment exp{config, ResolveGraph(config), {}, {}, {}, {}, {}, {}};
  const int n_agents = exp.graph.size();
  exp.laplacian = BuildLaplacian(exp.graph);
  if (!IsStronglyConnected(exp.graph)) {
    throw PreconditionError(
        "communication graph is not strongly connected; the algorithm requires "
        "a strongly connected digraph");
  }

  const auto& name = config.costs;
  if (name == "example1") {
    if (config.n != 2) throw std::invalid_argument("example1 costs live in R^2 (n = 2)");
    if (n_agents != 5) throw std::invalid_argument("example1 costs need 5 agents");
    exp.costs = Example1Costs();
  } else if (name == "example2") {
    if (static_cast<int>(config.mu.size()) != config.n) {
      throw std::invalid_argument("mu must have n entries");
    }
    std::vector<double> scales;
    for (int i = 1; i <= n_agents; ++i) scales.push_back(config.covariance_scale * i);
    exp.datasets = GenerateGaussianData(config.seed, config.mu, scales,
                                        config.samples_per_sensor,
                                        config.huber_tolerance);
    for (const auto& d : exp.datasets) exp.costs.push_back(std::make_shared<HuberCost>(d));
  } else if (name == "quadratic") {
    if (static_cast<int>(config.quadratics.size()) != n_agents) {
      throw std::invalid_argument("quadratic costs need one entry per agent");
    }
    for (const auto& [scale, center] : config.quadratics) {
      if (center.size() != config.n) {
        throw std::invalid_argument("quadratic center must have n entries");
      }
      exp.costs.push_back(MakeQuadratic(center, scale));
    }
  } else {
    throw std::invalid_argument("unknown cost set '" + name + "'");
  }

  if (config.sigma0.size() != 1 && static_cast<int>(config.sigma0.size()) != n_agents) {
    throw std::invalid_argument("sigma0 needs one value or one per agent");
  }

  exp.xi = LeftEigenvector(exp.laplacian);
  if (n_agents > 1) exp.certificate = ComputeSpectralCertificate(exp.laplacian, exp.xi);
  else exp.certificate.xi = exp.xi;

  const GlobalCost global(exp.costs);
  std::vector<Eigen::VectorXd> starts;
  MinimizerOptions opts;
  if (name == "example2") {
    // Convex: one start at the pooled mean; the origin as a second guess.
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(config.n);
    std::size_t total = 0;
    for (const auto& d : exp.datasets) {
      for (const auto& q : d.data) mean += q;
      total += d.data.size();
    }
    starts = {mean / static_cast<double>(total), Eigen::VectorXd::Zero(config.n)};
    opts.tolerance = 1e-8;
    opts.initial_step = 1e-3;
  } else {
    starts = GridStarts(config.n, config.oracle_lo, config.oracle_hi,
                        config.oracle_per_axis);
    opts.tolerance = 1e-11;
  }
  exp.oracle = CentralizedMinimizer(global, starts, opts);
  return exp;
}

NetworkState MakeInitialState(const Experiment& exp) {
  const auto& cfg = exp.config;
  const int n_agents = exp.graph.size();
  std::vector<Eigen::VectorXd> x0, v0;
  PortableRng rng(InitStreamSeed(cfg.seed));
  for (int i = 0; i < n_agents; ++i) {
    Eigen::VectorXd x(cfg.n), v(cfg.n);
    for (int k = 0; k < cfg.n; ++k) x(k) = rng.Uniform(cfg.init_lo, cfg.init_hi);
    for (int k = 0; k < cfg.n; ++k) v(k) = rng.Uniform(cfg.init_lo, cfg.init_hi);
    x0.push_back(x);
    v0.push_back(v);
  }
  auto check = [&](const std::vector<Eigen::VectorXd>& given, const char* what) {
    if (static_cast<int>(given.size()) != n_agents) {
      throw std::invalid_argument(std::string(what) + " needs one block per agent");
    }
    for (const auto& b : given) {
      if (b.size() != cfg.n) {
        throw std::invalid_argument(std::string(what) + " blocks must have n entries");
      }
    }
    return given;
  };
  if (cfg.x0) x0 = check(*cfg.x0, "x0");
  if (cfg.v0) v0 = check(*cfg.v0, "v0");

  std::vector<double> sigma0 = cfg.sigma0;
  if (sigma0.size() == 1) sigma0.assign(n_agents, sigma0.front());
  return InitialState(x0, v0, sigma0);
}

RunResult RunExperiment(const ExperimentConfig& config) {
  Experiment exp = BuildExperiment(config);
  const NetworkDynamics dynamics(exp.graph, exp.costs);
  const NetworkState s0 = MakeInitialState(exp);
  Trajectory traj = Integrate(
      s0, [&](const NetworkState& s) { return dynamics(s); }, config.integrator);

  RunResult out{std::move(exp), std::move(traj), {}, {}, {}};
  const Experiment& e = out.experiment;
  out.pair = ComputeStationaryPair(e.graph, e.costs, e.oracle.point, e.xi);

  SeriesOptions series;
  if (e.graph.size() > 1) {
    out.constants = ComputeLyapunovConstants(e.certificate, e.costs, e.xi.minCoeff(),
                                             e.graph.size());
    series.lyapunov = true;
    series.pair = out.pair;
    series.cert = e.certificate;
    series.sigma_zero = out.constants.sigma_zero;
  }
  out.report = MakeTrajectoryReport(out.trajectory.records, out.trajectory.final_state,
                                    e.oracle.point, e.xi, e.costs, e.graph, series);
  return out;
}

RunResult RunExample1(const ExperimentConfig& overrides) {
  return RunExperiment(overrides);
}

RunResult RunExample2(const ExperimentConfig& overrides) {
  return RunExperiment(overrides);
}

Eigen::VectorXd PerCoordinateError(const NetworkState& state,
                                   const std::vector<double>& mu) {
  const Eigen::Map<const Eigen::VectorXd> m(mu.data(), static_cast<Eigen::Index>(mu.size()));
  Eigen::VectorXd err = Eigen::VectorXd::Zero(m.size());
  for (const auto& a : state.agents) err = err.cwiseMax((a.x - m).cwiseAbs());
  return err;
}

}  // namespace dcopt
