#pragma once

// Correlation and classification metrics used by the benchmark runners.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "wordconf/core.hpp"

namespace wordconf {

/// Product-moment correlation. Throws on length mismatch, fewer than two
/// points, non-finite input, or a constant argument (r is undefined there).
inline double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw Error("pearson: length mismatch (" + std::to_string(x.size()) + " vs " +
                std::to_string(y.size()) + ")");
  if (x.size() < 2) throw Error("pearson: need at least 2 points");
  if (!all_finite(x) || !all_finite(y)) throw Error("pearson: non-finite input");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw Error("pearson: constant vector, correlation undefined");
  const double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

/// 1-based ranks; tied values share the mean of the ranks they span.
inline Vector average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return v[a] < v[b]; });
  Vector ranks(v.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i + 1;
    while (j < order.size() && v[order[j]] == v[order[i]]) ++j;
    // positions i..j-1 hold ranks i+1..j
    const double r = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[order[k]] = r;
    i = j;
  }
  return ranks;
}

inline double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw Error("spearman: length mismatch (" + std::to_string(x.size()) + " vs " +
                std::to_string(y.size()) + ")");
  if (x.size() < 2) throw Error("spearman: need at least 2 points");
  if (!all_finite(x) || !all_finite(y)) throw Error("spearman: non-finite input");
  const Vector rx = average_ranks(x), ry = average_ranks(y);
  try {
    return pearson(rx, ry);
  } catch (const Error&) {
    throw Error("spearman: constant vector, rho undefined");
  }
}

namespace detail {

// Exact rational accumulator for small macro-F1 sums; falls back to double
// once numerators or denominators would overflow.
struct RationalSum {
  std::int64_t num = 0, den = 1;
  bool exact = true;
  double approx = 0.0;

  void add(std::int64_t n, std::int64_t d) {
    approx += static_cast<double>(n) / static_cast<double>(d);
    if (!exact) return;
    const std::int64_t g = std::gcd(den, d);
    std::int64_t scale_a = d / g, scale_b = den / g, a, b, nd;
    if (__builtin_mul_overflow(num, scale_a, &a) || __builtin_mul_overflow(n, scale_b, &b) ||
        __builtin_mul_overflow(den, scale_a, &nd) || __builtin_add_overflow(a, b, &num)) {
      exact = false;
      return;
    }
    den = nd;
    const std::int64_t r = std::gcd(num, den);
    if (r > 1) {
      num /= r;
      den /= r;
    }
  }

  double divided_by(std::int64_t k) const {
    if (!exact) return approx / static_cast<double>(k);
    std::int64_t d;
    if (__builtin_mul_overflow(den, k, &d)) return approx / static_cast<double>(k);
    return static_cast<double>(num) / static_cast<double>(d);
  }
};

}  // namespace detail

/// Unweighted mean of per-class F1. Classes with no true and no predicted
/// members score 0. Evaluated in exact rational arithmetic when it fits, so
/// hand-computable cases come out as the nearest double to the true fraction.
inline double macro_f1(std::span<const std::string> truth, std::span<const std::string> pred,
                       std::span<const std::string> classes) {
  if (truth.size() != pred.size()) throw Error("macro_f1: truth/pred length mismatch");
  if (truth.empty()) throw Error("macro_f1: empty input");
  if (classes.empty()) throw Error("macro_f1: empty class list");
  std::map<std::string, std::size_t> index;
  for (const auto& c : classes) index.emplace(c, index.size());
  if (index.size() != classes.size()) throw Error("macro_f1: duplicate class label");
  const std::size_t k = index.size();
  std::vector<std::int64_t> tp(k, 0), fp(k, 0), fn(k, 0);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto t = index.find(truth[i]);
    const auto p = index.find(pred[i]);
    if (t == index.end()) throw Error("macro_f1: unknown label '" + truth[i] + "'");
    if (p == index.end()) throw Error("macro_f1: unknown label '" + pred[i] + "'");
    if (t->second == p->second) {
      ++tp[t->second];
    } else {
      ++fn[t->second];
      ++fp[p->second];
    }
  }
  detail::RationalSum sum;
  for (std::size_t c = 0; c < k; ++c) {
    const std::int64_t den = 2 * tp[c] + fp[c] + fn[c];
    if (den == 0 || tp[c] == 0) continue;
    sum.add(2 * tp[c], den);
  }
  return sum.divided_by(static_cast<std::int64_t>(k));
}

}  // namespace wordconf
