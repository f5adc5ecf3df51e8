#pragma once

// Dense linear algebra, initialization, Adagrad and a finite-difference
// gradient checker. Values are 64-bit throughout.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "taste/error.hpp"

namespace taste {

/// Seedable generator with bit-identical output on every conforming
/// standard library: mt19937_64 is fully specified, and the real-valued
/// draws below avoid the implementation-defined std distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer on [0, n).
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x;
    do x = engine_();
    while (x >= limit);
    return x % n;
  }
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::mt19937_64 engine_;
};

/// Derives independent stream seeds from one master seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t n, double fill = 0.0) : data_(n, fill) {}
  Vector(std::initializer_list<double> values) : data_(values) {}
  explicit Vector(std::vector<double> values) : data_(std::move(values)) {}

  std::size_t size() const { return data_.size(); }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  const std::vector<double>& raw() const { return data_; }
  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  Vector& operator+=(const Vector& o) {
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
    return *this;
  }
  friend bool operator==(const Vector&, const Vector&) = default;

 private:
  std::vector<double> data_;
};

/// Row-major dense matrix. Column vectors (biases) are n x 1.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }
  bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }
  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// out += M x
inline void gemv_acc(const Matrix& m, std::span<const double> x, std::span<double> out) {
  if (x.size() != m.cols() || out.size() != m.rows())
    throw Error(ErrorKind::Dimension, "matrix-vector shape mismatch (" + std::to_string(m.rows()) + "x" +
                                          std::to_string(m.cols()) + " times " + std::to_string(x.size()) + ")");
  const std::size_t cols = m.cols();
  const double* row = m.values().data();
  for (std::size_t r = 0; r < m.rows(); ++r, row += cols) {
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
    out[r] += acc;
  }
}

// out += M^T y
inline void gemv_t_acc(const Matrix& m, std::span<const double> y, std::span<double> out) {
  if (y.size() != m.rows() || out.size() != m.cols())
    throw Error(ErrorKind::Dimension, "transposed matrix-vector shape mismatch");
  const std::size_t cols = m.cols();
  const double* row = m.values().data();
  for (std::size_t r = 0; r < m.rows(); ++r, row += cols) {
    const double yr = y[r];
    if (yr == 0.0) continue;
    for (std::size_t c = 0; c < cols; ++c) out[c] += row[c] * yr;
  }
}

// G += a b^T
inline void outer_acc(Matrix& g, std::span<const double> a, std::span<const double> b) {
  if (a.size() != g.rows() || b.size() != g.cols()) throw Error(ErrorKind::Dimension, "outer product shape mismatch");
  const std::size_t cols = g.cols();
  double* row = g.values().data();
  for (std::size_t r = 0; r < g.rows(); ++r, row += cols) {
    const double ar = a[r];
    if (ar == 0.0) continue;
    for (std::size_t c = 0; c < cols; ++c) row[c] += ar * b[c];
  }
}

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// Entries uniform on +-sqrt(6 / (rows + cols)).
inline Matrix glorot_init(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  if (rows == 0 || cols == 0) throw Error(ErrorKind::Dimension, "glorot_init needs positive dimensions");
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Rng rng(seed);
  Matrix m(rows, cols);
  for (auto& v : m.values()) v = rng.uniform(-bound, bound);
  return m;
}

/// v[i] - max(v) - log(sum_j exp(v[j] - max(v))).
inline Vector log_softmax(std::span<const double> v) {
  if (v.empty()) throw Error(ErrorKind::Dimension, "log_softmax of an empty vector");
  for (double x : v)
    if (!std::isfinite(x)) throw Error(ErrorKind::Numeric, "log_softmax input is not finite");
  const double mx = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (double x : v) sum += std::exp(x - mx);
  const double lse = std::log(sum);
  Vector out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] - mx - lse;
  return out;
}

inline Vector log_softmax(const Vector& v) { return log_softmax(v.values()); }

// ---------------------------------------------------------------------------

struct Param {
  std::string name;
  Matrix value;
  Matrix grad;
  Matrix accum;  // Adagrad running sum of squared gradients
};

/// Named parameters, each with a same-shaped gradient and accumulator slot.
/// Insertion order is stable and is the serialization order.
class ParamStore {
 public:
  std::size_t add(std::string name, Matrix value) {
    Param p;
    p.name = std::move(name);
    p.grad = Matrix(value.rows(), value.cols());
    p.accum = Matrix(value.rows(), value.cols());
    p.value = std::move(value);
    params_.push_back(std::move(p));
    return params_.size() - 1;
  }

  std::size_t size() const { return params_.size(); }
  Param& operator[](std::size_t i) { return params_[i]; }
  const Param& operator[](std::size_t i) const { return params_[i]; }
  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  const Param* find(const std::string& name) const {
    for (const auto& p : params_)
      if (p.name == name) return &p;
    return nullptr;
  }

  void zero_grad() {
    for (auto& p : params_) p.grad.fill(0.0);
  }
  void reset_accumulators() {
    for (auto& p : params_) p.accum.fill(0.0);
  }
  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p.value.size();
    return n;
  }

 private:
  std::vector<Param> params_;
};

/// accum += g^2; p -= lr * g / (sqrt(accum) + eps); g = 0.
/// Validates every gradient before touching any parameter.
inline void adagrad_step(ParamStore& params, double lr, double eps) {
  for (const auto& p : params)
    for (double g : p.grad.values())
      if (!std::isfinite(g)) throw Error(ErrorKind::Numeric, "non-finite gradient in parameter '" + p.name + "'");
  for (auto& p : params) {
    auto v = p.value.values();
    auto g = p.grad.values();
    auto a = p.accum.values();
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (g[i] == 0.0) continue;
      a[i] += g[i] * g[i];
      v[i] -= lr * g[i] / (std::sqrt(a[i]) + eps);
      g[i] = 0.0;
    }
  }
}

struct TensorCheck {
  std::string name;
  double max_rel_error = 0.0;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::vector<TensorCheck> tensors;
};

inline double relative_error(double a, double n) {
  return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-8});
}

/// Compares `analytic` (one matrix per parameter, same order as `params`)
/// with central differences of `loss`. Every `stride`-th scalar of every
/// tensor is probed; parameters are restored afterwards.
inline GradCheckReport gradient_check(const std::function<double(const ParamStore&)>& loss, ParamStore& params,
                                      const std::vector<Matrix>& analytic, double h, std::size_t stride = 1) {
  if (analytic.size() != params.size()) throw Error(ErrorKind::Dimension, "gradient list does not match parameters");
  if (stride == 0) stride = 1;
  GradCheckReport report;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Param& p = params[k];
    if (!analytic[k].same_shape(p.value))
      throw Error(ErrorKind::Dimension, "gradient shape mismatch for '" + p.name + "'");
    TensorCheck tc;
    tc.name = p.name;
    for (std::size_t i = 0; i < p.value.size(); i += stride) {
      const double orig = p.value[i];
      p.value[i] = orig + h;
      const double up = loss(params);
      p.value[i] = orig - h;
      const double down = loss(params);
      p.value[i] = orig;
      const double numeric = (up - down) / (2.0 * h);
      const double err = relative_error(analytic[k][i], numeric);
      if (i == 0 || err > tc.max_rel_error) {
        tc.max_rel_error = err;
        tc.worst_index = i;
        tc.analytic = analytic[k][i];
        tc.numeric = numeric;
      }
    }
    report.max_rel_error = std::max(report.max_rel_error, tc.max_rel_error);
    report.tensors.push_back(std::move(tc));
  }
  return report;
}

}  // namespace taste
