#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lingdiv/error.hpp"

namespace lingdiv {

enum class Significance { HighlySignificant, VerySignificant, Significant, NotSignificant };

inline std::string_view to_string(Significance s) {
  switch (s) {
    case Significance::HighlySignificant: return "highly_significant";
    case Significance::VerySignificant: return "very_significant";
    case Significance::Significant: return "significant";
    case Significance::NotSignificant: return "not_significant";
  }
  return "not_significant";
}

// Strict upper bounds: p < 0.001, p < 0.01, p < 0.05.
constexpr Significance classify(double p) {
  if (p < 0.001) return Significance::HighlySignificant;
  if (p < 0.01) return Significance::VerySignificant;
  if (p < 0.05) return Significance::Significant;
  return Significance::NotSignificant;
}

struct TestResult {
  double t_statistic = 0.0;
  double degrees_of_freedom = 0.0;
  double p_value = 1.0;
  Significance significance = Significance::NotSignificant;
  // Both samples had zero variance; p is 1 (equal means) or 0 (unequal) by convention.
  bool degenerate = false;

  bool significant_at(double alpha) const { return p_value < alpha; }
};

struct CorrelationResult {
  double r = 0.0;
  std::size_t n = 0;
  std::vector<std::string> excluded;
};

enum class TestVariant { Welch, Student };

inline std::string_view to_string(TestVariant v) { return v == TestVariant::Welch ? "welch" : "student"; }

namespace detail {

// Continued fraction for the incomplete beta function (modified Lentz).
inline double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 100000;
  constexpr double kEps = 1e-12;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) break;
  }
  return h;
}

}  // namespace detail

// Regularized incomplete beta I_x(a, b). `y` must equal 1 - x; passing it
// separately avoids cancellation when x is close to 1.
inline double incomplete_beta(double a, double b, double x, double y) {
  if (x <= 0.0) return 0.0;
  if (y <= 0.0) return 1.0;
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log(y);
  if (x < (a + 1.0) / (a + b + 2.0)) return std::exp(log_front) * detail::beta_continued_fraction(a, b, x) / a;
  return 1.0 - std::exp(log_front) * detail::beta_continued_fraction(b, a, y) / b;
}

inline double incomplete_beta(double a, double b, double x) { return incomplete_beta(a, b, x, 1.0 - x); }

// Two-sided tail probability P(|T| >= |t|) for Student's t with `df` degrees of freedom.
inline double t_sf(double t, double df) {
  if (!(df > 0.0)) throw Error(ErrorCode::DegenerateInput, "t_sf requires df > 0");
  if (std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(t)) return 0.0;
  if (t == 0.0) return 1.0;
  const double t2 = t * t;
  const double x = df / (df + t2);
  const double y = t2 / (df + t2);
  return std::clamp(incomplete_beta(df / 2.0, 0.5, x, y), 0.0, 1.0);
}

namespace detail {

struct Moments {
  std::size_t n;
  double mean;
  double var;  // unbiased
};

inline Moments moments(std::span<const double> v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) {
    if (!std::isfinite(x)) throw Error(ErrorCode::DegenerateInput, "non-finite sample value");
    ss += (x - mean) * (x - mean);
  }
  // A constant sample has zero variance even when its computed mean is off by an ulp.
  if (std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); })) return {v.size(), v.front(), 0.0};
  return {v.size(), mean, ss / static_cast<double>(v.size() - 1)};
}

inline TestResult degenerate_result(double mean_a, double mean_b, double df) {
  TestResult r;
  r.degrees_of_freedom = df;
  r.degenerate = true;
  if (mean_a == mean_b) {
    r.t_statistic = 0.0;
    r.p_value = 1.0;
  } else {
    r.t_statistic = mean_a > mean_b ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
    r.p_value = 0.0;
  }
  r.significance = classify(r.p_value);
  return r;
}

inline void require_samples(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2)
    throw Error(ErrorCode::DegenerateInput, "t-test needs at least 2 observations per sample");
}

}  // namespace detail

// Two-sided Welch unequal-variance t-test with Welch-Satterthwaite df.
inline TestResult welch_t_test(std::span<const double> a, std::span<const double> b) {
  detail::require_samples(a, b);
  const auto ma = detail::moments(a), mb = detail::moments(b);
  const double ra = ma.var / static_cast<double>(ma.n);
  const double rb = mb.var / static_cast<double>(mb.n);
  const double se2 = ra + rb;
  if (se2 == 0.0) return detail::degenerate_result(ma.mean, mb.mean, static_cast<double>(ma.n + mb.n - 2));
  TestResult r;
  r.t_statistic = (ma.mean - mb.mean) / std::sqrt(se2);
  r.degrees_of_freedom =
      se2 * se2 / (ra * ra / static_cast<double>(ma.n - 1) + rb * rb / static_cast<double>(mb.n - 1));
  r.p_value = t_sf(r.t_statistic, r.degrees_of_freedom);
  r.significance = classify(r.p_value);
  return r;
}

// Two-sided pooled-variance Student t-test.
inline TestResult student_t_test(std::span<const double> a, std::span<const double> b) {
  detail::require_samples(a, b);
  const auto ma = detail::moments(a), mb = detail::moments(b);
  const double df = static_cast<double>(ma.n + mb.n - 2);
  const double pooled = ((ma.n - 1) * ma.var + (mb.n - 1) * mb.var) / df;
  const double se2 = pooled * (1.0 / static_cast<double>(ma.n) + 1.0 / static_cast<double>(mb.n));
  if (se2 == 0.0) return detail::degenerate_result(ma.mean, mb.mean, df);
  TestResult r;
  r.t_statistic = (ma.mean - mb.mean) / std::sqrt(se2);
  r.degrees_of_freedom = df;
  r.p_value = t_sf(r.t_statistic, df);
  r.significance = classify(r.p_value);
  return r;
}

inline TestResult t_test(std::span<const double> a, std::span<const double> b, TestVariant variant) {
  return variant == TestVariant::Welch ? welch_t_test(a, b) : student_t_test(a, b);
}

// Product-moment correlation.
inline CorrelationResult pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error(ErrorCode::DegenerateInput, "pearson: length mismatch");
  if (x.size() < 3) throw Error(ErrorCode::DegenerateInput, "pearson: need at least 3 points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) throw Error(ErrorCode::DegenerateInput, "pearson: zero variance");
  return {std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0), x.size(), {}};
}

// Benjamini-Hochberg adjusted p-values, in input order.
inline std::vector<double> benjamini_hochberg(std::span<const double> p) {
  const std::size_t m = p.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return p[i] < p[j]; });
  std::vector<double> adjusted(m);
  double running = 1.0;
  for (std::size_t k = m; k-- > 0;) {
    const std::size_t i = order[k];
    running = std::min(running, p[i] * static_cast<double>(m) / static_cast<double>(k + 1));
    adjusted[i] = std::min(running, 1.0);
  }
  return adjusted;
}

}  // namespace lingdiv
