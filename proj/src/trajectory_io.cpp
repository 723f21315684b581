#include "dcopt/trajectory_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dcopt {

using nlohmann::json;

namespace {

std::string Fmt(double d) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", d);
  return buf;
}

json VectorJson(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

json RowsJson(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(VectorJson(m.row(i).transpose()));
  return rows;
}

std::vector<std::string> SplitCsv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double ParseCell(const std::string& cell, int row) {
  std::size_t used = 0;
  double d = 0.0;
  try {
    d = std::stod(cell, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != cell.size()) {
    throw std::invalid_argument("trajectory row " + std::to_string(row) +
                                ": bad number '" + cell + "'");
  }
  return d;
}

}  // namespace

std::string TrajectoryCsvHeader(int n_agents, int dim) {
  std::string h = "t";
  for (const char* name : {"x", "v"}) {
    for (int i = 1; i <= n_agents; ++i) {
      for (int k = 1; k <= dim; ++k) {
        h += "," + std::string(name) + "_" + std::to_string(i) + "_" + std::to_string(k);
      }
    }
  }
  for (int i = 1; i <= n_agents; ++i) h += ",sigma_" + std::to_string(i);
  h += ",consensus_error,optimality_residual,w_error";
  return h;
}

void WriteTrajectoryCsv(std::ostream& out, const std::vector<NetworkState>& records,
                        const MetricSeries& series) {
  if (records.empty()) throw std::invalid_argument("no records to write");
  if (series.times.size() != records.size()) {
    throw std::invalid_argument("metric series does not match the records");
  }
  const int n_agents = records.front().num_agents();
  const int dim = records.front().dimension();
  out << TrajectoryCsvHeader(n_agents, dim) << '\n';
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto& s = records[r];
    std::string line = Fmt(s.time);
    for (const auto& a : s.agents) {
      for (int k = 0; k < dim; ++k) line += "," + Fmt(a.x(k));
    }
    for (const auto& a : s.agents) {
      for (int k = 0; k < dim; ++k) line += "," + Fmt(a.v(k));
    }
    for (const auto& a : s.agents) line += "," + Fmt(a.sigma);
    line += "," + Fmt(series.consensus_error[r]);
    line += "," + Fmt(series.optimality_residual[r]);
    line += "," + Fmt(series.w_error[r]);
    out << line << '\n';
  }
}

TrajectoryTable ReadTrajectoryCsv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("trajectory file is empty");
  const auto header = SplitCsv(line);
  // 1 + 2 N n + N + 3 columns; recover N and n from the x_i_k names.
  TrajectoryTable t;
  for (const auto& name : header) {
    if (name.rfind("x_", 0) == 0) {
      const auto us = name.find('_', 2);
      if (us == std::string::npos) throw std::invalid_argument("bad column " + name);
      t.n_agents = std::max(t.n_agents, std::stoi(name.substr(2, us - 2)));
      t.dim = std::max(t.dim, std::stoi(name.substr(us + 1)));
    }
  }
  if (t.n_agents == 0 || t.dim == 0 ||
      line != TrajectoryCsvHeader(t.n_agents, t.dim)) {
    throw std::invalid_argument("trajectory header does not match the expected layout");
  }
  const std::size_t cols = header.size();
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cells = SplitCsv(line);
    if (cells.size() != cols) {
      throw std::invalid_argument("trajectory row " + std::to_string(row) +
                                  " has " + std::to_string(cells.size()) +
                                  " columns, expected " + std::to_string(cols));
    }
    std::size_t c = 0;
    t.times.push_back(ParseCell(cells[c++], row));
    Eigen::MatrixXd x(t.n_agents, t.dim), v(t.n_agents, t.dim);
    for (int i = 0; i < t.n_agents; ++i)
      for (int k = 0; k < t.dim; ++k) x(i, k) = ParseCell(cells[c++], row);
    for (int i = 0; i < t.n_agents; ++i)
      for (int k = 0; k < t.dim; ++k) v(i, k) = ParseCell(cells[c++], row);
    Eigen::VectorXd sigma(t.n_agents);
    for (int i = 0; i < t.n_agents; ++i) sigma(i) = ParseCell(cells[c++], row);
    t.x.push_back(x);
    t.v.push_back(v);
    t.sigma.push_back(sigma);
    t.consensus_error.push_back(ParseCell(cells[c++], row));
    t.optimality_residual.push_back(ParseCell(cells[c++], row));
    t.w_error.push_back(ParseCell(cells[c++], row));
  }
  if (t.times.empty()) throw std::invalid_argument("trajectory has no rows");
  return t;
}

std::vector<NetworkState> RebuildStates(const TrajectoryTable& table,
                                        const Eigen::MatrixXd& laplacian) {
  if (laplacian.rows() != table.n_agents) {
    throw std::invalid_argument("graph size does not match the trajectory");
  }
  std::vector<NetworkState> out;
  for (std::size_t r = 0; r < table.times.size(); ++r) {
    const Eigen::MatrixXd w = LaplacianExponential(laplacian, table.times[r]);
    NetworkState s;
    s.time = table.times[r];
    for (int i = 0; i < table.n_agents; ++i) {
      s.agents.push_back({table.x[r].row(i).transpose(), table.v[r].row(i).transpose(),
                          w.row(i).transpose(), table.sigma[r](i)});
    }
    out.push_back(std::move(s));
  }
  return out;
}

json ToJson(const SpectralCertificate& cert) {
  return {{"xi", VectorJson(cert.xi)},
          {"lambda2_bar", cert.lambda2_bar},
          {"lambdaN_bar", cert.lambdaN_bar},
          {"lambda2_LtL", cert.lambda2_LtL},
          {"lambda1_bar", cert.lambda1_bar}};
}

json ToJson(const LyapunovConstants& c) {
  return {{"omega1", c.omega1},     {"omega2", c.omega2}, {"sigma_zero", c.sigma_zero},
          {"epsilon", c.epsilon},   {"varrho", c.varrho}, {"kappa", c.kappa},
          {"l_hat", c.l_hat},       {"w_check", c.w_check},
          {"eta_weight", c.eta_weight}};
}

json ToJson(const ConvergenceReport& r) {
  return {{"time", r.time},
          {"consensus_error", r.consensus_error},
          {"optimality_residual", r.optimality_residual},
          {"distance_to_oracle", r.distance_to_oracle},
          {"w_error", r.w_error},
          {"sigma", r.sigma_final}};
}

json ToJson(const MetricSeries& s) {
  return {{"t", s.times},
          {"consensus_error", s.consensus_error},
          {"optimality_residual", s.optimality_residual},
          {"distance_to_oracle", s.distance_to_oracle},
          {"w_error", s.w_error},
          {"lyapunov", s.lyapunov}};
}

double FirstTimeWithin(const std::vector<NetworkState>& records,
                       const std::vector<double>& mu, double bound) {
  for (const auto& r : records) {
    if (PerCoordinateError(r, mu).maxCoeff() < bound) return r.time;
  }
  return -1.0;
}

json MakeReportJson(const RunResult& run) {
  const Experiment& e = run.experiment;
  const Trajectory& traj = run.trajectory;
  json j;
  j["config"] = e.config.ToText();
  int edges = 0;
  for (int i = 0; i < e.graph.size(); ++i)
    for (int k = 0; k < e.graph.size(); ++k) edges += e.graph.weight(i, k) > 0.0;
  j["graph"] = {{"agents", e.graph.size()},
                {"edges", edges},
                {"strongly_connected", IsStronglyConnected(e.graph)},
                {"balanced", IsBalanced(e.graph)}};
  j["xi"] = VectorJson(e.xi);
  j["certificate"] = ToJson(e.certificate);

  const GlobalCost global(e.costs);
  NetworkState at_oracle = traj.final_state;
  for (auto& a : at_oracle.agents) a.x = e.oracle.point;
  j["oracle"] = {{"s_star", VectorJson(e.oracle.point)},
                 {"value", e.oracle.value},
                 {"gradient_norm", e.oracle.gradient_norm},
                 {"iterations", e.oracle.iterations},
                 {"optimality_residual", OptimalityResidual(at_oracle, e.costs, e.xi)}};
  j["constants"] = ToJson(run.constants);

  json pair = {{"x_bar", RowsJson(run.pair.x_bar)},
               {"v_bar", RowsJson(run.pair.v_bar)},
               {"solve_residual", run.pair.solve_residual}};
  pair["field_residual"] =
      StationaryFieldResidual(run.pair, e.graph, e.costs, e.xi,
                              std::vector<double>(e.graph.size(), 1.0));
  j["stationary_pair"] = pair;

  const NetworkState& s0 = traj.records.front();
  j["initial_state"] = {{"x0", RowsJson(s0.XMatrix())},
                        {"v0", RowsJson(s0.VMatrix())},
                        {"sigma0", VectorJson(s0.Sigmas())}};
  const auto& ic = e.config.integrator;
  j["integrator"] = {{"method", "rk4"},
                     {"step", ic.step},
                     {"t_end", ic.t_end},
                     {"stride", ic.record_stride},
                     {"records", traj.records.size()},
                     {"halvings", traj.halvings},
                     {"smallest_step", traj.smallest_step},
                     {"min_self_weight", traj.min_self_weight},
                     {"max_sigma_drop", traj.max_sigma_drop}};
  j["final"] = ToJson(run.report.final);
  j["series"] = ToJson(run.report.series);
  if (e.config.costs == "example2") {
    j["per_coordinate_error"] = {
        {"mu", e.config.mu},
        {"final", VectorJson(PerCoordinateError(traj.final_state, e.config.mu))},
        {"first_time_below_0.02", FirstTimeWithin(traj.records, e.config.mu, 0.02)}};
  }
  return j;
}

void WriteDatasetCsv(std::ostream& out, const std::vector<HuberSpec>& data) {
  if (data.empty()) return;
  const auto dim = data.front().data.front().size();
  out << "sensor,sample";
  for (Eigen::Index k = 1; k <= dim; ++k) out << ",q_" << k;
  out << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t j = 0; j < data[i].data.size(); ++j) {
      out << i + 1 << ',' << j + 1;
      for (Eigen::Index k = 0; k < dim; ++k) out << ',' << Fmt(data[i].data[j](k));
      out << '\n';
    }
  }
}

void WriteRunOutputs(const RunResult& run, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream f(dir / name);
    if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
    return f;
  };
  {
    auto f = open("trajectory.csv");
    WriteTrajectoryCsv(f, run.trajectory.records, run.report.series);
  }
  {
    auto f = open("report.json");
    f << MakeReportJson(run).dump(2) << '\n';
  }
  if (!run.experiment.datasets.empty()) {
    auto f = open("dataset.csv");
    WriteDatasetCsv(f, run.experiment.datasets);
  }
}

}  // namespace dcopt
