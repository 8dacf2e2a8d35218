#pragma once

// Minimal dense vector/matrix kit for the two-layer network. Row-major
// storage, raw-pointer kernels on the hot paths.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace txsage {

using Vec = std::vector<double>;

struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

  double* row(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
  const double* row(int r) const {
    return data.data() + static_cast<std::size_t>(r) * cols;
  }

  double& operator()(int r, int c) {
    return data[static_cast<std::size_t>(r) * cols + c];
  }
  double operator()(int r, int c) const {
    return data[static_cast<std::size_t>(r) * cols + c];
  }

  void fill(double v) { data.assign(data.size(), v); }
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// out = M x + b
inline void matvec_bias(const Mat& m, const double* x, const double* b, double* out) {
  for (int r = 0; r < m.rows; ++r) {
    const double* mr = m.row(r);
    double s = b[r];
    for (int c = 0; c < m.cols; ++c) s += mr[c] * x[c];
    out[r] = s;
  }
}

/// out += Mᵀ x   (x has m.rows entries, out has m.cols entries)
inline void matvec_t_add(const Mat& m, const double* x, double* out) {
  for (int r = 0; r < m.rows; ++r) {
    const double* mr = m.row(r);
    const double xr = x[r];
    for (int c = 0; c < m.cols; ++c) out[c] += xr * mr[c];
  }
}

/// M += x yᵀ
inline void add_outer(Mat& m, const double* x, const double* y) {
  for (int r = 0; r < m.rows; ++r) {
    double* mr = m.row(r);
    const double xr = x[r];
    for (int c = 0; c < m.cols; ++c) mr[c] += xr * y[c];
  }
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// log(1 + e^x), overflow-safe.
inline double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

}  // namespace txsage
