#include "sparsetrain/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace sparsetrain {

Matrix::Matrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), values_(rows * cols, 0.0) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values)
    : rows_(rows), cols_(cols), values_(std::move(values)) {
  if (values_.size() != rows_ * cols_) {
    throw ShapeError("matrix: " + std::to_string(values_.size()) + " values for a " +
                     std::to_string(rows_) + "x" + std::to_string(cols_) + " shape");
  }
  require_finite(values_, "matrix");
}

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) return Matrix{};
  const std::size_t cols = rows.front().size();
  std::vector<double> values;
  values.reserve(rows.size() * cols);
  for (const auto& r : rows) {
    if (r.size() != cols) throw ShapeError("matrix: ragged rows");
    values.insert(values.end(), r.begin(), r.end());
  }
  return Matrix(rows.size(), cols, std::move(values));
}

std::vector<std::vector<double>> Matrix::to_rows() const {
  std::vector<std::vector<double>> out;
  out.reserve(rows_);
  for (std::size_t r = 0; r < rows_; ++r) {
    auto span = row(r);
    out.emplace_back(span.begin(), span.end());
  }
  return out;
}

double SeededRng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t SeededRng::uniform_index(std::uint64_t bound) {
  if (bound == 0) throw InvalidInput("uniform_index: bound must be positive");
  // Reject the low partial bucket so every residue is equally likely.
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t x = engine_();
    if (x >= threshold) return x % bound;
  }
}

double SeededRng::normal() {
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t h = mix64(base);
  for (std::uint64_t t : tags) h = mix64(h ^ mix64(t));
  return h;
}

void require_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw InvalidInput(std::string(what) + ": non-finite entry");
  }
}

Vector softmax(std::span<const double> v) {
  if (v.empty()) throw InvalidInput("softmax: empty input");
  require_finite(v, "softmax");
  const double peak = *std::max_element(v.begin(), v.end());
  Vector out(v.size());
  double total = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = std::exp(v[i] - peak);
    total += out[i];
  }
  for (double& x : out) x /= total;
  return out;
}

Matrix attention_probs(const Matrix& q, const Matrix& k) {
  if (q.cols() != k.cols()) {
    throw ShapeError("attention: Q has " + std::to_string(q.cols()) + " columns, K has " +
                     std::to_string(k.cols()));
  }
  if (q.rows() == 0 || k.rows() == 0 || q.cols() == 0) {
    throw ShapeError("attention: empty Q or K");
  }
  const double scale = 1.0 / std::sqrt(static_cast<double>(q.cols()));
  Matrix probs(q.rows(), k.rows());
  Vector logits(k.rows());
  for (std::size_t i = 0; i < q.rows(); ++i) {
    for (std::size_t j = 0; j < k.rows(); ++j) logits[j] = dot(q.row(i), k.row(j)) * scale;
    const Vector p = softmax(logits);
    std::copy(p.begin(), p.end(), probs.row(i).begin());
  }
  return probs;
}

AttentionResult scaled_dot_attention(const Matrix& q, const Matrix& k, const Matrix& v) {
  if (k.rows() != v.rows()) {
    throw ShapeError("attention: K has " + std::to_string(k.rows()) + " rows, V has " +
                     std::to_string(v.rows()));
  }
  Matrix probs = attention_probs(q, k);
  Matrix context(q.rows(), v.cols());
  for (std::size_t i = 0; i < q.rows(); ++i) {
    for (std::size_t j = 0; j < k.rows(); ++j) {
      const double p = probs(i, j);
      for (std::size_t c = 0; c < v.cols(); ++c) context(i, c) += p * v(j, c);
    }
  }
  return {std::move(probs), std::move(context)};
}

double quantile_sorted(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw InvalidInput("quantile: empty input");
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

Quartiles quartiles(std::span<const double> v) {
  if (v.empty()) throw InvalidInput("quartiles: empty input");
  require_finite(v, "quartiles");
  Vector sorted(v.begin(), v.end());
  std::sort(sorted.begin(), sorted.end());
  return {quantile_sorted(sorted, 0.25), quantile_sorted(sorted, 0.5),
          quantile_sorted(sorted, 0.75)};
}

IndexList argsort_desc(std::span<const double> v) {
  require_finite(v, "argsort_desc");
  IndexList idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] > v[b]; });
  return idx;
}

IndexList sample_without_replacement(std::size_t n, std::size_t k, SeededRng& rng) {
  if (k > n) {
    throw InvalidInput("sample_without_replacement: k=" + std::to_string(k) +
                       " exceeds n=" + std::to_string(n));
  }
  // Partial Fisher-Yates: the first k slots end up holding the draw.
  IndexList pool(n);
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  for (std::size_t i = 0; i < k; ++i) {
    const auto j = i + static_cast<std::size_t>(rng.uniform_index(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeError("dot: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double mean(std::span<const double> v) {
  if (v.empty()) throw InvalidInput("mean: empty input");
  double acc = 0.0;
  for (double x : v) acc += x;
  return acc / static_cast<double>(v.size());
}

}  // namespace sparsetrain
