// Shared primitives: small vectors, errors, deterministic reductions and a
// minimal node-parallel loop.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace isoflow {

/// Point or vector in R^{n+1}; for n = 1 the third component is always zero.
using Vec3 = std::array<double, 3>;

inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }

/// Tangent vector in the local orthonormal frame {e_1, e_2}; n = 1 uses [0] only.
using FrameVec = std::array<double, 2>;

/// Symmetric tensor in the local orthonormal frame; n = 1 uses a11 only.
struct Sym2 {
  double a11 = 0.0;
  double a12 = 0.0;
  double a22 = 0.0;

  double trace(int n) const { return n == 1 ? a11 : a11 + a22; }
  double det(int n) const { return n == 1 ? a11 : a11 * a22 - a12 * a12; }
  /// Bilinear form evaluation B(u, v).
  double apply(int n, const FrameVec& u, const FrameVec& v) const {
    if (n == 1) return a11 * u[0] * v[0];
    return a11 * u[0] * v[0] + a12 * (u[0] * v[1] + u[1] * v[0]) + a22 * u[1] * v[1];
  }
  /// Ascending eigenvalues; for n = 1 both entries equal a11.
  std::array<double, 2> eigenvalues(int n) const {
    if (n == 1) return {a11, a11};
    const double mean = 0.5 * (a11 + a22);
    const double half_diff = 0.5 * (a11 - a22);
    const double r = std::hypot(half_diff, a12);
    return {mean - r, mean + r};
  }
  Sym2 operator+(const Sym2& o) const { return {a11 + o.a11, a12 + o.a12, a22 + o.a22}; }
  Sym2 operator*(double s) const { return {s * a11, s * a12, s * a22}; }
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: body spec, problem string, resolution.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A support function whose spherical Hessian A[h] fails to be positive-definite.
class NonConvexError : public Error {
 public:
  NonConvexError(std::size_t node, double margin)
      : Error(describe(node, margin)), node_(node), margin_(margin) {}
  std::size_t node() const { return node_; }
  double margin() const { return margin_; }

 private:
  static std::string describe(std::size_t node, double margin) {
    std::ostringstream os;
    os << "non-convex support function: min eigenvalue " << margin << " at node " << node;
    return os.str();
  }
  std::size_t node_;
  double margin_;
};

class NonPositiveError : public Error {
 public:
  explicit NonPositiveError(double min_h)
      : Error("support function not positive: min h = " + std::to_string(min_h)), min_h_(min_h) {}
  double min_h() const { return min_h_; }

 private:
  double min_h_;
};

/// Neumaier-compensated sum; the order of accumulation is fixed so results
/// are reproducible bit for bit.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

namespace detail {
inline int& thread_count() {
  static int count = 1;
  return count;
}
}  // namespace detail

/// Worker threads used by per-node maps. Reductions are always sequential,
/// so results do not depend on this setting.
inline void set_num_threads(int n) { detail::thread_count() = std::max(1, n); }
inline int num_threads() { return detail::thread_count(); }

/// Runs body(i) for i in [0, count); each index is written by exactly one thread.
template <class Body>
void parallel_for(std::size_t count, Body&& body) {
  const int threads = num_threads();
  if (threads <= 1 || count < 1024) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  const std::size_t chunk = (count + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const std::size_t begin = t * chunk;
    const std::size_t end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([begin, end, &body] {
      for (std::size_t i = begin; i < end; ++i) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

/// FNV-1a over raw bytes, rendered as 16 hex digits.
inline std::string fnv1a_hex(const void* data, std::size_t bytes) {
  std::uint64_t hash = 14695981039346656037ull;
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < bytes; ++i) {
    hash ^= p[i];
    hash *= 1099511628211ull;
  }
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[hash & 0xf];
    hash >>= 4;
  }
  return out;
}

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

/// Relative residual |a-b| / max(|a|, |b|, 1).
inline double relative_residual(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1.0});
}

}  // namespace isoflow
