#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dcopt {

/// A differentiable local cost f_i : R^n -> R.
///
/// Implementations are immutable; evaluation is reentrant.
class CostFunction {
 public:
  virtual ~CostFunction() = default;

  virtual int dimension() const = 0;
  virtual double Value(const Eigen::VectorXd& s) const = 0;
  virtual Eigen::VectorXd Gradient(const Eigen::VectorXd& s) const = 0;

  /// Lipschitz constant of the gradient, when one is declared. For costs with
  /// a singular point the hint holds on segments that stay at least
  /// `kSingularRadius` away from it.
  virtual std::optional<double> LipschitzHint() const { return std::nullopt; }

  /// Distance from `s` to the set where the gradient is not smooth.
  /// Infinity when there is none.
  virtual double DistanceToSingularSet(const Eigen::VectorXd& s) const;

  virtual std::string Name() const = 0;

  static constexpr double kSingularRadius = 1.0;
};

using CostPtr = std::shared_ptr<const CostFunction>;
using CostList = std::vector<CostPtr>;

/// f(s) = profile(||s - center||) with gradient profile'(r) (s - center) / r.
///
/// The gradient at r = 0 is defined as zero. That is the limit for profiles
/// with profile'(0) = 0 and a regularization otherwise.
class RadialCost final : public CostFunction {
 public:
  struct Profile {
    std::function<double(double)> value;
    std::function<double(double)> slope;  // d value / d r
  };

  RadialCost(std::string name, Eigen::VectorXd center, Profile profile,
             std::optional<double> lipschitz, bool singular_center);

  int dimension() const override { return static_cast<int>(center_.size()); }
  double Value(const Eigen::VectorXd& s) const override;
  Eigen::VectorXd Gradient(const Eigen::VectorXd& s) const override;
  std::optional<double> LipschitzHint() const override { return lipschitz_; }
  double DistanceToSingularSet(const Eigen::VectorXd& s) const override;
  std::string Name() const override { return name_; }

  const Eigen::VectorXd& center() const { return center_; }

 private:
  std::string name_;
  Eigen::VectorXd center_;
  Profile profile_;
  std::optional<double> lipschitz_;
  bool singular_center_;
};

/// scale * ||s - center||^2.
CostPtr MakeQuadratic(Eigen::VectorXd center, double scale);

/// The five local costs of the nonconvex benchmark over R^2:
///   f1 = 5 sin(||s + [4,5]||)
///   f2 = 10 cos(ln ||s + [8,10]||)
///   f3 = 4 ||s + [2,3]||^(4/3)
///   f4 = 2 ||s - [3,5]||^2
///   f5 = ||s + [1,2]||^2 / sqrt(||s + [1,2]||^2 + 2)
/// f1 and f2 are nonconvex; their sum with the rest is strictly convex near
/// the minimizer.
CostList Example1Costs();

/// Norm floor applied before the logarithm in f2.
inline constexpr double kLogNormFloor = 1e-9;

/// Scalar Huber loss: (q-s)^2/2 inside |q-s| <= tol, tol|q-s| - tol^2/2 outside.
/// Throws std::invalid_argument when tol <= 0.
double HuberScalar(double q, double s, double tol);

/// d/ds of HuberScalar: -clamp(q - s, -tol, tol).
double HuberScalarDerivative(double q, double s, double tol);

struct HuberSpec {
  double tolerance = 0.5;
  std::vector<Eigen::VectorXd> data;  // measurements Q_ij, all of dimension n

  /// Throws std::invalid_argument unless tolerance > 0 and data is nonempty
  /// with a common dimension.
  void Validate() const;
};

/// f(s) = || sum_j H(Q_j, s) ||_1 with H applied componentwise.
///
/// Per coordinate the data is kept sorted with prefix sums of q and q^2, so
/// value and gradient cost O(n log m) for m measurements. The outer l1 norm
/// uses the subgradient selection sign(0) = 0.
class HuberCost final : public CostFunction {
 public:
  explicit HuberCost(const HuberSpec& spec);

  int dimension() const override { return static_cast<int>(columns_.size()); }
  double Value(const Eigen::VectorXd& s) const override;
  Eigen::VectorXd Gradient(const Eigen::VectorXd& s) const override;
  /// Each inner term has slope bounded by 1, so the count bounds the Hessian.
  std::optional<double> LipschitzHint() const override {
    return static_cast<double>(count_);
  }
  std::string Name() const override { return "huber"; }

  double tolerance() const { return tolerance_; }
  std::size_t count() const { return count_; }

  /// Sum over the data of H(q, s) for one coordinate.
  double CoordinateLoss(int k, double s) const;
  /// Sum over the data of dH/ds for one coordinate.
  double CoordinateSlope(int k, double s) const;

 private:
  struct Column {
    std::vector<double> sorted;
    std::vector<double> prefix;     // prefix[j] = sum of sorted[0..j)
    std::vector<double> prefix_sq;  // same for squares
  };
  double tolerance_;
  std::size_t count_;
  std::vector<Column> columns_;
};

/// Sum of local costs. Throws std::invalid_argument on an empty list or a
/// dimension mismatch.
class GlobalCost final : public CostFunction {
 public:
  explicit GlobalCost(CostList terms);

  int dimension() const override { return terms_.front()->dimension(); }
  double Value(const Eigen::VectorXd& s) const override;
  Eigen::VectorXd Gradient(const Eigen::VectorXd& s) const override;
  std::optional<double> LipschitzHint() const override;
  double DistanceToSingularSet(const Eigen::VectorXd& s) const override;
  std::string Name() const override { return "global"; }

  const CostList& terms() const { return terms_; }

 private:
  CostList terms_;
};

/// Stacked local gradients col(grad f_1(x_1), ..., grad f_N(x_N)).
Eigen::VectorXd StackedGradient(const CostList& costs,
                                const std::vector<Eigen::VectorXd>& points);

struct MinimizerOptions {
  double tolerance = 1e-10;  // on ||grad f||
  int max_iterations = 200000;
  double initial_step = 1.0;
  double armijo = 1e-4;
  double shrink = 0.5;
};

struct MinimizerResult {
  Eigen::VectorXd point;
  double value = 0.0;
  double gradient_norm = 0.0;
  int iterations = 0;
  int start_index = 0;
};

/// Uniform per-axis grid of `per_axis`^dim points over [lo, hi]^dim.
std::vector<Eigen::VectorXd> GridStarts(int dim, double lo, double hi,
                                        int per_axis);

/// Gradient descent with Armijo backtracking from each start; returns the
/// lowest-value start that reached ||grad|| < tolerance. Throws
/// std::runtime_error when no start converges within the iteration cap.
MinimizerResult CentralizedMinimizer(const CostFunction& f,
                                     const std::vector<Eigen::VectorXd>& starts,
                                     const MinimizerOptions& options = {});

struct GradientCheckReport {
  std::vector<double> errors;  // per point
  double max_error = 0.0;
  int worst_index = -1;
  int skipped = 0;  // points too close to the singular set
};

/// Central-difference comparison. Per point the error is
/// max_k |fd_k - g_k| / max(1, ||g||_inf). Points closer than `exclusion` to
/// the cost's singular set are skipped.
GradientCheckReport GradientCheck(const CostFunction& f,
                                  const std::vector<Eigen::VectorXd>& points,
                                  double h = 1e-5, double exclusion = 0.1);

}  // namespace dcopt
