#pragma once

// Reference computations used to derive the frozen values in the tests. They
// share no code with the library: plain loops, no Eigen decompositions.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

using Mat = std::vector<std::vector<double>>;
using Vec = std::vector<double>;

inline Mat Zeros(int n) { return Mat(n, Vec(n, 0.0)); }

// Laplacian from an edge list (src, dst), 0-indexed, unit weights.
inline Mat Laplacian(int n, const std::vector<std::pair<int, int>>& edges) {
  Mat l = Zeros(n);
  for (auto [src, dst] : edges) {
    l[dst][src] -= 1.0;
    l[dst][dst] += 1.0;
  }
  return l;
}

inline Mat Transpose(const Mat& a) {
  Mat t = Zeros(static_cast<int>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j) t[j][i] = a[i][j];
  return t;
}

inline Mat Mul(const Mat& a, const Mat& b) {
  const std::size_t n = a.size();
  Mat c = Zeros(static_cast<int>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

// Cyclic Jacobi rotations; returns eigenvalues sorted ascending.
inline Vec JacobiEigenvalues(Mat a) {
  const std::size_t n = a.size();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
      }
    }
  }
  Vec ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a[i][i];
  std::sort(ev.begin(), ev.end());
  return ev;
}

// Left null vector by repeated multiplication with the lazy walk
// P = I - L / (2 max_i l_ii), whose rows sum to one; xi^T P = xi^T.
inline Vec PowerLeftNull(const Mat& l, int iterations = 200000) {
  const std::size_t n = l.size();
  double dmax = 0.0;
  for (std::size_t i = 0; i < n; ++i) dmax = std::max(dmax, l[i][i]);
  Vec x(n, 1.0 / n);
  for (int it = 0; it < iterations; ++it) {
    Vec y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        y[j] += x[i] * ((i == j ? 1.0 : 0.0) - l[i][j] / (2.0 * dmax));
    double s = 0.0;
    for (double v : y) s += v;
    for (auto& v : y) v /= s;
    x = y;
  }
  return x;
}

// Example 1 global cost written out directly.
inline double Example1Global(double a, double b) {
  auto nrm = [](double x, double y) { return std::sqrt(x * x + y * y); };
  const double r1 = nrm(a + 4, b + 5);
  const double r2 = nrm(a + 8, b + 10);
  const double r3 = nrm(a + 2, b + 3);
  const double r5 = nrm(a + 1, b + 2);
  return 5.0 * std::sin(r1) + 10.0 * std::cos(std::log(r2)) +
         4.0 * std::pow(r3, 4.0 / 3.0) + 2.0 * ((a - 3) * (a - 3) + (b - 5) * (b - 5)) +
         r5 * r5 / std::sqrt(r5 * r5 + 2.0);
}

// Newton's method on a 2-D function with central-difference derivatives.
inline std::array<double, 2> Newton2(const std::function<double(double, double)>& f,
                                     double a, double b, int iters = 60) {
  const double h = 1e-4;
  for (int k = 0; k < iters; ++k) {
    const double ga = (f(a + h, b) - f(a - h, b)) / (2 * h);
    const double gb = (f(a, b + h) - f(a, b - h)) / (2 * h);
    const double f0 = f(a, b);
    const double haa = (f(a + h, b) - 2 * f0 + f(a - h, b)) / (h * h);
    const double hbb = (f(a, b + h) - 2 * f0 + f(a, b - h)) / (h * h);
    const double hab =
        (f(a + h, b + h) - f(a + h, b - h) - f(a - h, b + h) + f(a - h, b - h)) / (4 * h * h);
    const double det = haa * hbb - hab * hab;
    a -= (hbb * ga - hab * gb) / det;
    b -= (-hab * ga + haa * gb) / det;
  }
  return {a, b};
}

}  // namespace oracle
