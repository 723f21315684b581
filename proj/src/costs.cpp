#include "dcopt/costs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace dcopt {

double CostFunction::DistanceToSingularSet(const Eigen::VectorXd&) const {
  return std::numeric_limits<double>::infinity();
}

RadialCost::RadialCost(std::string name, Eigen::VectorXd center,
                       Profile profile, std::optional<double> lipschitz,
                       bool singular_center)
    : name_(std::move(name)),
      center_(std::move(center)),
      profile_(std::move(profile)),
      lipschitz_(lipschitz),
      singular_center_(singular_center) {
  if (center_.size() == 0) throw std::invalid_argument("empty center");
}

double RadialCost::Value(const Eigen::VectorXd& s) const {
  return profile_.value((s - center_).norm());
}

Eigen::VectorXd RadialCost::Gradient(const Eigen::VectorXd& s) const {
  const Eigen::VectorXd u = s - center_;
  const double r = u.norm();
  if (r == 0.0) return Eigen::VectorXd::Zero(u.size());
  return (profile_.slope(r) / r) * u;
}

double RadialCost::DistanceToSingularSet(const Eigen::VectorXd& s) const {
  if (!singular_center_) return std::numeric_limits<double>::infinity();
  return (s - center_).norm();
}

CostPtr MakeQuadratic(Eigen::VectorXd center, double scale) {
  if (!(scale > 0.0)) throw std::invalid_argument("quadratic scale must be > 0");
  RadialCost::Profile p{[scale](double r) { return scale * r * r; },
                        [scale](double r) { return 2.0 * scale * r; }};
  return std::make_shared<RadialCost>("quadratic", std::move(center), p,
                                      2.0 * scale, false);
}

CostList Example1Costs() {
  auto vec = [](double a, double b) { return Eigen::Vector2d(a, b).eval(); };
  CostList costs;

  // Hints for f1..f3 bound the Hessian on ||u|| >= kSingularRadius.
  costs.push_back(std::make_shared<RadialCost>(
      "f1", vec(-4, -5),
      RadialCost::Profile{[](double r) { return 5.0 * std::sin(r); },
                          [](double r) { return 5.0 * std::cos(r); }},
      5.0, true));

  costs.push_back(std::make_shared<RadialCost>(
      "f2", vec(-8, -10),
      RadialCost::Profile{
          [](double r) {
            return 10.0 * std::cos(std::log(std::max(r, kLogNormFloor)));
          },
          [](double r) {
            const double rr = std::max(r, kLogNormFloor);
            return -10.0 * std::sin(std::log(rr)) / rr;
          }},
      10.0 * std::sqrt(2.0), true));

  costs.push_back(std::make_shared<RadialCost>(
      "f3", vec(-2, -3),
      RadialCost::Profile{
          [](double r) { return 4.0 * std::pow(r, 4.0 / 3.0); },
          [](double r) { return (16.0 / 3.0) * std::cbrt(r); }},
      16.0 / 3.0, true));

  costs.push_back(std::make_shared<RadialCost>(
      "f4", vec(3, 5),
      RadialCost::Profile{[](double r) { return 2.0 * r * r; },
                          [](double r) { return 4.0 * r; }},
      4.0, false));

  costs.push_back(std::make_shared<RadialCost>(
      "f5", vec(-1, -2),
      RadialCost::Profile{
          [](double r) { return r * r / std::sqrt(r * r + 2.0); },
          [](double r) {
            const double q = r * r + 2.0;
            return r * (r * r + 4.0) / (q * std::sqrt(q));
          }},
      std::sqrt(2.0), false));
  return costs;
}

double HuberScalar(double q, double s, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("Huber tolerance must be > 0");
  const double r = std::abs(q - s);
  if (r <= tol) return 0.5 * r * r;
  return tol * r - 0.5 * tol * tol;
}

double HuberScalarDerivative(double q, double s, double tol) {
  if (!(tol > 0.0)) throw std::invalid_argument("Huber tolerance must be > 0");
  return -std::clamp(q - s, -tol, tol);
}

void HuberSpec::Validate() const {
  if (!(tolerance > 0.0)) throw std::invalid_argument("Huber tolerance must be > 0");
  if (data.empty()) throw std::invalid_argument("Huber data set is empty");
  const auto n = data.front().size();
  if (n == 0) throw std::invalid_argument("Huber measurements are empty vectors");
  for (const auto& q : data) {
    if (q.size() != n) {
      throw std::invalid_argument("Huber measurements differ in dimension");
    }
  }
}

HuberCost::HuberCost(const HuberSpec& spec)
    : tolerance_(spec.tolerance), count_(spec.data.size()) {
  spec.Validate();
  const int n = static_cast<int>(spec.data.front().size());
  columns_.resize(n);
  for (int k = 0; k < n; ++k) {
    Column& c = columns_[k];
    c.sorted.reserve(count_);
    for (const auto& q : spec.data) c.sorted.push_back(q(k));
    std::sort(c.sorted.begin(), c.sorted.end());
    c.prefix.assign(count_ + 1, 0.0);
    c.prefix_sq.assign(count_ + 1, 0.0);
    for (std::size_t j = 0; j < count_; ++j) {
      c.prefix[j + 1] = c.prefix[j] + c.sorted[j];
      c.prefix_sq[j + 1] = c.prefix_sq[j] + c.sorted[j] * c.sorted[j];
    }
  }
}

namespace {

struct Partition {
  std::size_t lo;  // q < s - tol
  std::size_t hi;  // q <= s + tol; indices [lo, hi) are the quadratic branch
};

Partition Split(const std::vector<double>& sorted, double s, double tol) {
  const auto lo = std::lower_bound(sorted.begin(), sorted.end(), s - tol);
  const auto hi = std::upper_bound(lo, sorted.end(), s + tol);
  return {static_cast<std::size_t>(lo - sorted.begin()),
          static_cast<std::size_t>(hi - sorted.begin())};
}

}  // namespace

double HuberCost::CoordinateLoss(int k, double s) const {
  const Column& c = columns_[k];
  const double tol = tolerance_;
  const auto [lo, hi] = Split(c.sorted, s, tol);
  const double m = static_cast<double>(hi - lo);
  const double sum_mid = c.prefix[hi] - c.prefix[lo];
  const double sq_mid = c.prefix_sq[hi] - c.prefix_sq[lo];
  const double n_low = static_cast<double>(lo);
  const double n_up = static_cast<double>(count_ - hi);
  const double sum_low = c.prefix[lo];
  const double sum_up = c.prefix[count_] - c.prefix[hi];

  const double quad = 0.5 * std::max(0.0, sq_mid - 2.0 * s * sum_mid + m * s * s);
  const double low = tol * (n_low * s - sum_low) - 0.5 * tol * tol * n_low;
  const double up = tol * (sum_up - n_up * s) - 0.5 * tol * tol * n_up;
  return quad + low + up;
}

double HuberCost::CoordinateSlope(int k, double s) const {
  const Column& c = columns_[k];
  const auto [lo, hi] = Split(c.sorted, s, tolerance_);
  const double m = static_cast<double>(hi - lo);
  const double sum_mid = c.prefix[hi] - c.prefix[lo];
  const double n_low = static_cast<double>(lo);
  const double n_up = static_cast<double>(count_ - hi);
  return -(sum_mid - m * s) + tolerance_ * (n_low - n_up);
}

double HuberCost::Value(const Eigen::VectorXd& s) const {
  double total = 0.0;
  for (int k = 0; k < dimension(); ++k) total += std::abs(CoordinateLoss(k, s(k)));
  return total;
}

Eigen::VectorXd HuberCost::Gradient(const Eigen::VectorXd& s) const {
  Eigen::VectorXd g(dimension());
  for (int k = 0; k < dimension(); ++k) {
    const double inner = CoordinateLoss(k, s(k));
    const double sign = inner > 0.0 ? 1.0 : (inner < 0.0 ? -1.0 : 0.0);
    g(k) = sign * CoordinateSlope(k, s(k));
  }
  return g;
}

GlobalCost::GlobalCost(CostList terms) : terms_(std::move(terms)) {
  if (terms_.empty()) throw std::invalid_argument("global cost needs at least one term");
  const int n = terms_.front()->dimension();
  for (const auto& t : terms_) {
    if (!t) throw std::invalid_argument("null cost term");
    if (t->dimension() != n) {
      throw std::invalid_argument("cost terms differ in dimension");
    }
  }
}

double GlobalCost::Value(const Eigen::VectorXd& s) const {
  double v = 0.0;
  for (const auto& t : terms_) v += t->Value(s);
  return v;
}

Eigen::VectorXd GlobalCost::Gradient(const Eigen::VectorXd& s) const {
  Eigen::VectorXd g = Eigen::VectorXd::Zero(dimension());
  for (const auto& t : terms_) g += t->Gradient(s);
  return g;
}

std::optional<double> GlobalCost::LipschitzHint() const {
  double sum = 0.0;
  for (const auto& t : terms_) {
    const auto h = t->LipschitzHint();
    if (!h) return std::nullopt;
    sum += *h;
  }
  return sum;
}

double GlobalCost::DistanceToSingularSet(const Eigen::VectorXd& s) const {
  double d = std::numeric_limits<double>::infinity();
  for (const auto& t : terms_) d = std::min(d, t->DistanceToSingularSet(s));
  return d;
}

Eigen::VectorXd StackedGradient(const CostList& costs,
                                const std::vector<Eigen::VectorXd>& points) {
  if (costs.size() != points.size()) {
    throw std::invalid_argument("one point per cost required");
  }
  const int n = costs.front()->dimension();
  Eigen::VectorXd g(n * static_cast<int>(costs.size()));
  for (std::size_t i = 0; i < costs.size(); ++i) {
    g.segment(static_cast<int>(i) * n, n) = costs[i]->Gradient(points[i]);
  }
  return g;
}

std::vector<Eigen::VectorXd> GridStarts(int dim, double lo, double hi,
                                        int per_axis) {
  if (dim <= 0 || per_axis <= 0) throw std::invalid_argument("bad grid shape");
  std::vector<Eigen::VectorXd> out;
  std::vector<int> idx(dim, 0);
  const double step = per_axis > 1 ? (hi - lo) / (per_axis - 1) : 0.0;
  while (true) {
    Eigen::VectorXd p(dim);
    for (int k = 0; k < dim; ++k) p(k) = per_axis > 1 ? lo + step * idx[k] : 0.5 * (lo + hi);
    out.push_back(p);
    int k = 0;
    while (k < dim && ++idx[k] == per_axis) idx[k++] = 0;
    if (k == dim) break;
  }
  return out;
}

MinimizerResult CentralizedMinimizer(const CostFunction& f,
                                     const std::vector<Eigen::VectorXd>& starts,
                                     const MinimizerOptions& options) {
  if (starts.empty()) throw std::invalid_argument("no starting points");
  if (!(options.tolerance > 0.0)) throw std::invalid_argument("tolerance must be > 0");

  std::optional<MinimizerResult> best;
  for (std::size_t s = 0; s < starts.size(); ++s) {
    Eigen::VectorXd x = starts[s];
    double fx = f.Value(x);
    Eigen::VectorXd g = f.Gradient(x);
    double step = options.initial_step;
    int it = 0;
    for (; it < options.max_iterations && g.norm() >= options.tolerance; ++it) {
      const double g2 = g.squaredNorm();
      // Armijo backtracking, then let the step grow back for the next iterate.
      // Near the minimizer the predicted decrease drops below the resolution
      // of f, so there only a shrinking gradient norm counts; comparing values
      // that far down would accept rounding noise.
      const double resolution = 64.0 * std::numeric_limits<double>::epsilon() *
                                std::max(1.0, std::abs(fx));
      double t = step;
      bool accepted = false;
      Eigen::VectorXd trial;
      double ft = fx;
      for (; t > 1e-20; t *= options.shrink) {
        trial = x - t * g;
        ft = f.Value(trial);
        if (options.armijo * t * g2 < resolution) {
          accepted = f.Gradient(trial).norm() < std::sqrt(g2);
        } else {
          accepted = ft <= fx - options.armijo * t * g2;
        }
        if (accepted) break;
      }
      if (!accepted) break;  // no progress possible at working precision
      x = trial;
      fx = ft;
      g = f.Gradient(x);
      step = t / options.shrink;
    }
    const double gn = g.norm();
    if (!(gn < options.tolerance) || !std::isfinite(fx)) continue;
    if (!best || fx < best->value) {
      best = MinimizerResult{x, fx, gn, it, static_cast<int>(s)};
    }
  }
  if (!best) {
    throw std::runtime_error(
        "centralized minimizer did not converge from any start");
  }
  return *best;
}

GradientCheckReport GradientCheck(const CostFunction& f,
                                  const std::vector<Eigen::VectorXd>& points,
                                  double h, double exclusion) {
  GradientCheckReport report;
  for (std::size_t p = 0; p < points.size(); ++p) {
    const Eigen::VectorXd& x = points[p];
    if (f.DistanceToSingularSet(x) < exclusion) {
      ++report.skipped;
      report.errors.push_back(0.0);
      continue;
    }
    const Eigen::VectorXd g = f.Gradient(x);
    double err = 0.0;
    for (int k = 0; k < x.size(); ++k) {
      Eigen::VectorXd xp = x, xm = x;
      xp(k) += h;
      xm(k) -= h;
      const double fd = (f.Value(xp) - f.Value(xm)) / (2.0 * h);
      err = std::max(err, std::abs(fd - g(k)));
    }
    err /= std::max(1.0, g.cwiseAbs().maxCoeff());
    report.errors.push_back(err);
    if (err > report.max_error || report.worst_index < 0) {
      report.max_error = std::max(report.max_error, err);
      report.worst_index = static_cast<int>(p);
    }
  }
  return report;
}

}  // namespace dcopt
