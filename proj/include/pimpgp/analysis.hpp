#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "pimpgp/stats.hpp"

namespace pimpgp {

// Raised when a sample admits no test (all differences zero, or a
// zero-variance group).
struct DegenerateSampleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Two metric series paired by shared seed.
struct PairedSample {
  std::string label_a;
  std::string label_b;
  std::vector<std::pair<double, double>> values;
};

struct WilcoxonResult {
  double w = 0.0;        // min(W+, W-) over signed ranks
  double p_value = 1.0;  // two-sided
  bool significant = false;
  int n_used = 0;  // non-zero differences
  bool exact = false;
};

namespace detail {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Regularized incomplete gamma P(a,x) by series (x < a+1) or continued
// fraction; Q(a,x) = 1 - P(a,x).
inline double regularized_gamma_p(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("invalid incomplete gamma arguments");
  if (x == 0.0) return 0.0;
  const double log_gamma_a = std::lgamma(a);
  if (x < a + 1.0) {
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      term *= x / ap;
      sum += term;
      if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - log_gamma_a);
  }
  // Lentz continued fraction for Q.
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::fabs(delta - 1.0) < 1e-16) break;
  }
  const double q = std::exp(-x + a * std::log(x) - log_gamma_a) * h;
  return 1.0 - q;
}

inline double chi_squared_upper_tail(double x, int dof) {
  if (x <= 0.0) return 1.0;
  return 1.0 - regularized_gamma_p(static_cast<double>(dof) / 2.0, x / 2.0);
}

// Average ranks of |d|, scaled by 2 so tied averages stay integral.
inline std::vector<std::int64_t> scaled_ranks(const std::vector<double>& abs_diffs) {
  const std::size_t n = abs_diffs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return abs_diffs[i] < abs_diffs[j]; });
  std::vector<std::int64_t> ranks2(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && abs_diffs[order[j + 1]] == abs_diffs[order[i]]) ++j;
    // Positions i..j (0-based) share the average rank ((i+1)+(j+1))/2.
    const std::int64_t avg2 = static_cast<std::int64_t>(i + j) + 2;
    for (std::size_t k = i; k <= j; ++k) ranks2[order[k]] = avg2;
    i = j + 1;
  }
  return ranks2;
}

}  // namespace detail

inline constexpr int kWilcoxonExactLimit = 25;

// Two-sided Wilcoxon signed-rank test.  Zero differences are dropped; tied
// |differences| get average ranks; W = min(W+, W-).  The null distribution
// is enumerated exactly (subset-sum table over the realized ranks) up to
// n=25 and approximated normally with tie and continuity corrections above.
inline WilcoxonResult wilcoxon_signed_rank(std::span<const std::pair<double, double>> pairs,
                                           double alpha = 0.05) {
  std::vector<double> abs_diffs;
  std::vector<int> signs;
  for (const auto& [a, b] : pairs) {
    const double d = a - b;
    if (d == 0.0) continue;
    abs_diffs.push_back(std::fabs(d));
    signs.push_back(d > 0.0 ? 1 : -1);
  }
  const std::size_t n = abs_diffs.size();
  if (n == 0) throw DegenerateSampleError("all paired differences are zero; no test possible");

  const std::vector<std::int64_t> ranks2 = detail::scaled_ranks(abs_diffs);
  std::int64_t w_plus2 = 0, w_minus2 = 0;
  for (std::size_t i = 0; i < n; ++i) (signs[i] > 0 ? w_plus2 : w_minus2) += ranks2[i];
  const std::int64_t w2 = std::min(w_plus2, w_minus2);

  WilcoxonResult result;
  result.w = static_cast<double>(w2) / 2.0;
  result.n_used = static_cast<int>(n);

  if (n <= kWilcoxonExactLimit) {
    result.exact = true;
    // counts[s] = number of sign assignments whose positive scaled-rank sum
    // is s.  Max sum is n(n+1) <= 650, and counts <= 2^25 fit exactly.
    const std::int64_t total = std::accumulate(ranks2.begin(), ranks2.end(), std::int64_t{0});
    std::vector<double> counts(static_cast<std::size_t>(total) + 1, 0.0);
    counts[0] = 1.0;
    std::int64_t reach = 0;
    for (const std::int64_t r : ranks2) {
      reach += r;
      for (std::int64_t s = reach; s >= r; --s)
        counts[static_cast<std::size_t>(s)] += counts[static_cast<std::size_t>(s - r)];
    }
    double below = 0.0;
    for (std::int64_t s = 0; s <= w2; ++s) below += counts[static_cast<std::size_t>(s)];
    result.p_value = std::min(1.0, 2.0 * below / std::ldexp(1.0, static_cast<int>(n)));
  } else {
    const double nd = static_cast<double>(n);
    const double mu = nd * (nd + 1.0) / 4.0;
    double tie_term = 0.0;
    {
      std::vector<double> sorted = abs_diffs;
      std::sort(sorted.begin(), sorted.end());
      std::size_t i = 0;
      while (i < sorted.size()) {
        std::size_t j = i;
        while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
        const double t = static_cast<double>(j - i + 1);
        tie_term += (t * t * t - t);
        i = j + 1;
      }
    }
    const double sigma = std::sqrt(nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0 - tie_term / 48.0);
    if (sigma == 0.0) throw DegenerateSampleError("zero variance in the rank distribution");
    const double z = (static_cast<double>(w2) / 2.0 - mu + 0.5) / sigma;
    result.p_value = std::min(1.0, 2.0 * detail::normal_cdf(z));
  }
  // Below six informative pairs the exact two-sided floor (2/2^n) cannot
  // reach the 0.05 level; the guard keeps tiny samples from ever flagging.
  result.significant = result.p_value < alpha && result.n_used >= 6;
  return result;
}

inline WilcoxonResult wilcoxon_signed_rank(const PairedSample& sample, double alpha = 0.05) {
  return wilcoxon_signed_rank(std::span<const std::pair<double, double>>(sample.values), alpha);
}

struct BartlettResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// Bartlett's K-squared homogeneity-of-variance test with a chi-square
// p-value on k-1 degrees of freedom.
inline BartlettResult bartlett(std::span<const std::vector<double>> groups) {
  const std::size_t k = groups.size();
  if (k < 2) throw std::invalid_argument("bartlett needs at least two groups");
  double total_n = 0.0;
  std::vector<double> variances(k);
  for (std::size_t g = 0; g < k; ++g) {
    if (groups[g].size() < 2)
      throw std::invalid_argument("bartlett needs at least two values per group");
    const double sd = sample_sd(groups[g]);
    variances[g] = sd * sd;
    if (variances[g] == 0.0)
      throw DegenerateSampleError("a group has zero variance; no test possible");
    total_n += static_cast<double>(groups[g].size());
  }
  const double kd = static_cast<double>(k);
  double pooled = 0.0, log_sum = 0.0, inv_sum = 0.0;
  for (std::size_t g = 0; g < k; ++g) {
    const double df = static_cast<double>(groups[g].size()) - 1.0;
    pooled += df * variances[g];
    log_sum += df * std::log(variances[g]);
    inv_sum += 1.0 / df;
  }
  const double df_total = total_n - kd;
  pooled /= df_total;
  const double correction = 1.0 + (inv_sum - 1.0 / df_total) / (3.0 * (kd - 1.0));
  BartlettResult result;
  result.statistic = (df_total * std::log(pooled) - log_sum) / correction;
  result.p_value = detail::chi_squared_upper_tail(result.statistic, static_cast<int>(k) - 1);
  return result;
}

enum class CompareMetric { FinalBestFitness, UniqueSolutionFraction, MeanSolutionDepth };

constexpr const char* metric_name(CompareMetric m) {
  switch (m) {
    case CompareMetric::FinalBestFitness: return "final_best_fitness";
    case CompareMetric::UniqueSolutionFraction: return "unique_solution_fraction";
    case CompareMetric::MeanSolutionDepth: return "mean_solution_depth";
  }
  return "?";
}

constexpr bool lower_is_better(CompareMetric m) {
  return m != CompareMetric::UniqueSolutionFraction;
}

struct ComparisonRow {
  std::string metric;
  double mean_a = 0.0;
  double sd_a = 0.0;
  double mean_b = 0.0;
  double sd_b = 0.0;
  std::string winner;  // "a", "b", or "none"
  double p_value = 1.0;
  bool significant = false;
};

// One table row comparing two shared-seed batches on a metric.  The winner
// comes from the means alone; the Wilcoxon p only flags significance.
// Identical series (a degenerate test) report p=1 and no winner.
inline ComparisonRow compare(const PairedSample& sample, CompareMetric metric,
                             double alpha = 0.05) {
  std::vector<double> a, b;
  a.reserve(sample.values.size());
  b.reserve(sample.values.size());
  for (const auto& [x, y] : sample.values) {
    a.push_back(x);
    b.push_back(y);
  }
  ComparisonRow row;
  row.metric = metric_name(metric);
  row.mean_a = mean_of(a);
  row.sd_a = sample_sd(a);
  row.mean_b = mean_of(b);
  row.sd_b = sample_sd(b);
  if (row.mean_a == row.mean_b) {
    row.winner = "none";
  } else {
    const bool a_wins = lower_is_better(metric) ? row.mean_a < row.mean_b : row.mean_a > row.mean_b;
    row.winner = a_wins ? "a" : "b";
  }
  try {
    const WilcoxonResult test = wilcoxon_signed_rank(sample, alpha);
    row.p_value = test.p_value;
    row.significant = test.significant;
  } catch (const DegenerateSampleError&) {
    row.p_value = 1.0;
    row.significant = false;
  }
  return row;
}

}  // namespace pimpgp
