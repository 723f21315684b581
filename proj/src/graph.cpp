#include "dcopt/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

namespace dcopt {

Digraph::Digraph(Eigen::MatrixXd adjacency) : adjacency_(std::move(adjacency)) {
  if (adjacency_.rows() != adjacency_.cols() || adjacency_.rows() == 0) {
    throw std::invalid_argument("adjacency matrix must be square and nonempty");
  }
  for (int i = 0; i < adjacency_.rows(); ++i) {
    if (adjacency_(i, i) != 0.0) {
      throw std::invalid_argument("adjacency diagonal must be zero (node " +
                                  std::to_string(i + 1) + ")");
    }
    for (int j = 0; j < adjacency_.cols(); ++j) {
      if (!(adjacency_(i, j) >= 0.0) || !std::isfinite(adjacency_(i, j))) {
        throw std::invalid_argument("adjacency weights must be finite and >= 0");
      }
    }
  }
}

Digraph Digraph::FromEdges(int n_agents,
                           const std::vector<std::pair<int, int>>& edges) {
  if (n_agents <= 0) throw std::invalid_argument("n_agents must be positive");
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_agents, n_agents);
  for (auto [src, dst] : edges) {
    if (src < 0 || dst < 0 || src >= n_agents || dst >= n_agents) {
      throw std::invalid_argument("edge endpoint out of range");
    }
    a(dst, src) = 1.0;
  }
  return Digraph(std::move(a));
}

Digraph Digraph::FromEdgeListText(const std::string& text, int n_agents) {
  struct Edge {
    int src, dst;
    double weight;
  };
  std::vector<Edge> edges;
  int max_node = 0;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream ls(line);
    Edge e{0, 0, 1.0};
    if (!(ls >> e.src >> e.dst)) {
      throw std::invalid_argument("edge list line " + std::to_string(line_no) +
                                  ": expected `src dst [weight]`");
    }
    double w;
    if (ls >> w) e.weight = w;
    std::string rest;
    if (ls >> rest) {
      throw std::invalid_argument("edge list line " + std::to_string(line_no) +
                                  ": trailing tokens");
    }
    if (e.src < 1 || e.dst < 1) {
      throw std::invalid_argument("edge list line " + std::to_string(line_no) +
                                  ": nodes are 1-indexed");
    }
    if (e.src == e.dst) {
      throw std::invalid_argument("edge list line " + std::to_string(line_no) +
                                  ": self loops are not allowed");
    }
    max_node = std::max({max_node, e.src, e.dst});
    edges.push_back(e);
  }
  const int n = n_agents > 0 ? n_agents : max_node;
  if (n <= 0) throw std::invalid_argument("edge list is empty");
  if (max_node > n) throw std::invalid_argument("edge endpoint exceeds node count");
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : edges) a(e.dst - 1, e.src - 1) = e.weight;
  return Digraph(std::move(a));
}

Digraph Digraph::FromEdgeListFile(const std::filesystem::path& path,
                                  int n_agents) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open edge list " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return FromEdgeListText(buf.str(), n_agents);
}

std::string Digraph::ToEdgeListText() const {
  std::ostringstream out;
  out.precision(17);
  for (int i = 0; i < size(); ++i) {
    for (int j = 0; j < size(); ++j) {
      if (adjacency_(i, j) > 0.0) {
        out << j + 1 << ' ' << i + 1 << ' ' << adjacency_(i, j) << '\n';
      }
    }
  }
  return out.str();
}

Eigen::MatrixXd BuildLaplacian(const Digraph& g) {
  const Eigen::MatrixXd& a = g.adjacency();
  Eigen::MatrixXd l = -a;
  l.diagonal() = a.rowwise().sum();
  return l;
}

bool IsStronglyConnected(const Digraph& g) {
  const int n = g.size();
  // Tarjan's algorithm, iterative. Edge j -> i exists when a(i, j) > 0.
  std::vector<std::vector<int>> out(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (g.weight(i, j) > 0.0) out[j].push_back(i);

  std::vector<int> index(n, -1), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<int> stack;
  int counter = 0;
  int components = 0;

  struct Frame {
    int node;
    std::size_t next;
  };
  for (int root = 0; root < n; ++root) {
    if (index[root] >= 0) continue;
    std::vector<Frame> call{{root, 0}};
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      Frame& f = call.back();
      if (f.next < out[f.node].size()) {
        const int m = out[f.node][f.next++];
        if (index[m] < 0) {
          index[m] = low[m] = counter++;
          stack.push_back(m);
          on_stack[m] = true;
          call.push_back({m, 0});
        } else if (on_stack[m]) {
          low[f.node] = std::min(low[f.node], index[m]);
        }
        continue;
      }
      const int v = f.node;
      if (low[v] == index[v]) {
        ++components;
        int w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
        } while (w != v);
      }
      call.pop_back();
      if (!call.empty()) {
        low[call.back().node] = std::min(low[call.back().node], low[v]);
      }
    }
  }
  return components == 1;
}

bool IsBalanced(const Digraph& g, double tol) {
  const Eigen::RowVectorXd col_sums = BuildLaplacian(g).colwise().sum();
  return col_sums.cwiseAbs().maxCoeff() <= tol;
}

Eigen::VectorXd LeftEigenvector(const Eigen::MatrixXd& laplacian,
                                double zero_tol) {
  const int n = static_cast<int>(laplacian.rows());
  if (n == 1) return Eigen::VectorXd::Ones(1);

  Eigen::EigenSolver<Eigen::MatrixXd> es(laplacian.transpose());
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("eigendecomposition of L^T failed");
  }
  const Eigen::VectorXcd& values = es.eigenvalues();
  int k0 = 0;
  for (int k = 1; k < n; ++k)
    if (std::abs(values(k)) < std::abs(values(k0))) k0 = k;

  double next = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k)
    if (k != k0) next = std::min(next, std::abs(values(k)));
  if (std::abs(values(k0)) > zero_tol || next <= zero_tol) {
    throw std::domain_error(
        "null space of L^T is not one-dimensional; graph is not strongly "
        "connected");
  }

  Eigen::VectorXd xi = es.eigenvectors().col(k0).real();
  xi /= xi.sum();
  if (xi.minCoeff() <= 1e-12) {
    throw std::domain_error(
        "left eigenvector is not strictly positive; graph is not strongly "
        "connected");
  }
  return xi;
}

Eigen::MatrixXd SymmetrizedLaplacian(const Eigen::MatrixXd& laplacian,
                                     const Eigen::VectorXd& xi) {
  const Eigen::MatrixXd rl = xi.asDiagonal() * laplacian;
  return rl + rl.transpose();
}

SpectralCertificate ComputeSpectralCertificate(const Eigen::MatrixXd& laplacian,
                                               const Eigen::VectorXd& xi) {
  const int n = static_cast<int>(laplacian.rows());
  if (xi.size() != n) throw std::invalid_argument("xi has wrong dimension");
  SpectralCertificate cert;
  cert.xi = xi;
  if (n == 1) {
    throw std::domain_error("spectral certificate needs at least two agents");
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> bar(
      SymmetrizedLaplacian(laplacian, xi), Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ltl(
      laplacian.transpose() * laplacian, Eigen::EigenvaluesOnly);
  // Eigenvalues come back in increasing order.
  cert.lambda1_bar = bar.eigenvalues()(0);
  cert.lambda2_bar = bar.eigenvalues()(1);
  cert.lambda2_LtL = ltl.eigenvalues()(1);
  cert.lambdaN_bar = ltl.eigenvalues()(n - 1);
  if (!(cert.lambda2_bar > 0.0) || !(cert.lambda2_LtL > 0.0)) {
    throw std::domain_error(
        "spectral certificate: lambda2 is not positive; graph is not strongly "
        "connected");
  }
  return cert;
}

Eigen::MatrixXd LaplacianExponential(const Eigen::MatrixXd& laplacian,
                                     double t) {
  if (t < 0.0) throw std::invalid_argument("exponential time must be >= 0");
  const Eigen::MatrixXd a = -t * laplacian;
  return a.exp();
}

ExponentialLimitReport CheckExponentialLimit(const Eigen::MatrixXd& laplacian,
                                             const Eigen::VectorXd& xi,
                                             const std::vector<double>& t_grid,
                                             double entry_tol) {
  const int n = static_cast<int>(laplacian.rows());
  const Eigen::MatrixXd limit = Eigen::VectorXd::Ones(n) * xi.transpose();
  ExponentialLimitReport report;
  for (double t : t_grid) {
    const Eigen::MatrixXd e = LaplacianExponential(laplacian, t);
    report.times.push_back(t);
    report.min_entry.push_back(e.minCoeff());
    report.min_diagonal.push_back(e.diagonal().minCoeff());
    report.limit_deviation.push_back((e - limit).cwiseAbs().maxCoeff());
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const bool bad = i == j ? !(e(i, j) > 0.0) : e(i, j) < -entry_tol;
        if (bad) report.violations.push_back({t, i, j, e(i, j)});
      }
    }
  }
  return report;
}

Digraph Fig1Digraph() {
  return Digraph::FromEdges(
      5, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {1, 4}, {4, 0}, {2, 0}});
}

Digraph SymmetricCycle(int n) {
  if (n < 1) throw std::invalid_argument("cycle needs at least one node");
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  if (n == 2) {
    a(0, 1) = a(1, 0) = 1.0;
  } else if (n > 2) {
    for (int i = 0; i < n; ++i) {
      a(i, (i + 1) % n) = 1.0;
      a((i + 1) % n, i) = 1.0;
    }
  }
  return Digraph(std::move(a));
}

}  // namespace dcopt
