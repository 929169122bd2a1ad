#pragma once

// Deterministic numeric primitives shared by the masking, merging, selection
// and simulator modules.

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

#include "sparsetrain/errors.hpp"

namespace sparsetrain {

using Vector = std::vector<double>;
using IndexList = std::vector<std::size_t>;

/// Dense row-major matrix of finite doubles.
class Matrix {
 public:
  Matrix() = default;
  /// Zero-filled rows x cols matrix.
  Matrix(std::size_t rows, std::size_t cols);
  /// Throws ShapeError if values.size() != rows * cols, InvalidInput on non-finite entries.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  /// Builds a matrix from equal-length rows. An empty list yields a 0 x 0 matrix.
  static Matrix from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }
  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }

  std::span<const double> row(std::size_t r) const {
    return {values_.data() + r * cols_, cols_};
  }
  std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }

  const std::vector<double>& values() const { return values_; }
  std::vector<std::vector<double>> to_rows() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

/// Seedable generator with a platform-independent stream.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The standard distribution classes are implementation-defined, so
/// all derived draws (uniform reals, bounded integers, normals) are computed
/// here from raw 64-bit words.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t uniform_index(std::uint64_t bound);
  /// Standard normal via Box-Muller (one draw per call, no cached pair).
  double normal();

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer; used to derive independent child seeds.
std::uint64_t mix64(std::uint64_t x);
/// Child seed for a (base, tag...) tuple, e.g. (seed, epoch, sample, modality).
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags);

/// Throws InvalidInput naming `what` if any entry is NaN or infinite.
void require_finite(std::span<const double> v, const char* what);

/// Max-shifted softmax. Throws InvalidInput on empty or non-finite input.
Vector softmax(std::span<const double> v);

struct AttentionResult {
  Matrix probs;    // q.rows x k.rows, each row sums to 1
  Matrix context;  // probs * v
};

/// Row-wise softmax(Q K^T / sqrt(d)).
Matrix attention_probs(const Matrix& q, const Matrix& k);
/// softmax(Q K^T / sqrt(d)) V. Throws ShapeError on dimension mismatch.
AttentionResult scaled_dot_attention(const Matrix& q, const Matrix& k, const Matrix& v);

struct Quartiles {
  double q1;
  double q2;
  double q3;
};

/// Quantile at probability p by linear interpolation at position p*(n-1) of the sorted data.
double quantile_sorted(std::span<const double> sorted, double p);
/// (q1, median, q3) under the same convention. Throws InvalidInput on empty input.
Quartiles quartiles(std::span<const double> v);

/// Indices ordering v descending; ties keep ascending index order.
IndexList argsort_desc(std::span<const double> v);

/// k distinct indices from [0, n), returned ascending. Throws InvalidInput if k > n.
IndexList sample_without_replacement(std::size_t n, std::size_t k, SeededRng& rng);

double dot(std::span<const double> a, std::span<const double> b);
double mean(std::span<const double> v);

}  // namespace sparsetrain
