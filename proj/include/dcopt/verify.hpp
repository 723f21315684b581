#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dcopt/experiment.hpp"
#include "dcopt/random.hpp"

namespace dcopt {

/// One named check: `value` compared against `threshold` in the direction
/// given by `comparison` ("<", "<=", ">=").
struct CheckResult {
  std::string name;
  bool ok = false;
  double value = 0.0;
  double threshold = 0.0;
  std::string comparison;
  std::string detail;
};

struct VerifyOptions {
  std::uint64_t seed = 7;
  int quadratic_form_samples = 1000;
  int gradient_points = 100;
  int lyapunov_samples = 100;
  int field_samples = 100;
};

/// Graph oracles, gradient checks, the stationary pair round trip, Lyapunov
/// sampling with its negative control, and the per-agent vs compact field
/// comparison for one experiment.
std::vector<CheckResult> RunVerification(const Experiment& exp,
                                         const VerifyOptions& options = {});

/// Strongly connected by construction: a random Hamiltonian cycle plus each
/// remaining ordered pair with probability `extra_edge_prob`; weights
/// uniform in [0.5, 2].
Digraph RandomStronglyConnectedDigraph(int n_agents, PortableRng& rng,
                                       double extra_edge_prob = 0.3);

/// min over samples of x^T L̄ x - (lambda2_bar / N) x^T x, where each x is
/// Gaussian projected onto c^T x = 0 for a fresh random positive c.
double SampledQuadraticFormMargin(const Eigen::MatrixXd& laplacian,
                                  const SpectralCertificate& cert, int samples,
                                  PortableRng& rng);

/// Random points in [lo, hi]^dim kept at least `clearance` from the cost's
/// singular set.
std::vector<Eigen::VectorXd> SampleRegularPoints(const CostFunction& f, int count,
                                                 double lo, double hi,
                                                 double clearance, PortableRng& rng);

/// max over `count` random states of the largest absolute difference between
/// NetworkDynamics and CompactFormField, divided by max(1, field magnitude).
double FieldConsistencyError(const Digraph& g, const CostList& costs,
                             const Eigen::VectorXd& center, int count,
                             PortableRng& rng);

}  // namespace dcopt
