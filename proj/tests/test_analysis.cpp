#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

#include "pimpgp/analysis.hpp"
#include "pimpgp/rng.hpp"

using namespace pimpgp;

namespace {

std::vector<std::pair<double, double>> pair_up(const std::vector<double>& a,
                                               const std::vector<double>& b) {
  REQUIRE(a.size() == b.size());
  std::vector<std::pair<double, double>> pairs;
  for (std::size_t i = 0; i < a.size(); ++i) pairs.emplace_back(a[i], b[i]);
  return pairs;
}

// Independent check: midranks in plain doubles, all 2^n sign assignments
// enumerated bit by bit.
std::pair<double, double> brute_wilcoxon(const std::vector<double>& diffs) {
  std::vector<double> abs_d;
  std::vector<int> sign;
  for (const double d : diffs)
    if (d != 0.0) {
      abs_d.push_back(std::fabs(d));
      sign.push_back(d > 0.0 ? 1 : -1);
    }
  const std::size_t n = abs_d.size();
  REQUIRE(n >= 1);
  REQUIRE(n <= 20);
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t less = 0, equal = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (abs_d[j] < abs_d[i]) ++less;
      if (abs_d[j] == abs_d[i]) ++equal;
    }
    rank[i] = static_cast<double>(less) + (static_cast<double>(equal) + 1.0) / 2.0;
  }
  double w_plus = 0.0, w_minus = 0.0;
  for (std::size_t i = 0; i < n; ++i) (sign[i] > 0 ? w_plus : w_minus) += rank[i];
  const double w = std::min(w_plus, w_minus);

  std::uint64_t below = 0;
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask & (std::uint64_t{1} << i)) sum += rank[i];
    if (sum <= w + 1e-9) ++below;
  }
  const double p = std::min(1.0, 2.0 * static_cast<double>(below) / static_cast<double>(total));
  return {w, p};
}

}  // namespace

TEST_CASE("a clean sweep of six positive differences is significant", "[analysis]") {
  const std::vector<double> base = {10, 20, 30, 40, 50, 60};
  std::vector<double> shifted = base;
  for (std::size_t i = 0; i < shifted.size(); ++i) shifted[i] += static_cast<double>(i) + 1.0;
  const auto result = wilcoxon_signed_rank(
      std::span<const std::pair<double, double>>(pair_up(shifted, base)));
  CHECK(result.w == 0.0);
  CHECK(result.p_value == 0.03125);  // 2/64
  CHECK(result.exact);
  CHECK(result.n_used == 6);
  CHECK(result.significant);
}

TEST_CASE("identical series admit no signed-rank test", "[analysis]") {
  const std::vector<double> same = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0};
  CHECK_THROWS_AS(
      wilcoxon_signed_rank(std::span<const std::pair<double, double>>(pair_up(same, same))),
      DegenerateSampleError);
}

TEST_CASE("exact signed-rank p-values match a reference implementation", "[analysis]") {
  // Eight pairs, one zero difference, tied |differences|.
  PairedSample sample;
  sample.values = pair_up({12.1, 11.4, 9.8, 10.2, 13.0, 8.7, 10.9, 12.4},
                          {11.0, 11.9, 9.8, 9.1, 11.6, 9.2, 10.1, 11.2});
  const auto result = wilcoxon_signed_rank(sample);
  CHECK(result.w == 3.0);
  CHECK(result.n_used == 7);
  CHECK(result.exact);
  CHECK_THAT(result.p_value, Catch::Matchers::WithinRel(0.078125, 1e-15));
  CHECK_FALSE(result.significant);

  // Classic ten-subject blood-pressure sample (one zero, one tie pair).
  // The tied |differences| share midranks, so the exact enumeration runs
  // over the observed rank multiset: p = 2 * 162/512.
  PairedSample textbook;
  textbook.values = pair_up({125, 115, 130, 140, 140, 115, 140, 125, 140, 135},
                            {110, 122, 125, 120, 140, 124, 123, 137, 135, 145});
  const auto tb = wilcoxon_signed_rank(textbook);
  CHECK(tb.w == 18.0);
  CHECK(tb.n_used == 9);
  CHECK_THAT(tb.p_value, Catch::Matchers::WithinRel(0.6328125, 1e-15));
}

TEST_CASE("the large-sample approximation matches a reference implementation", "[analysis]") {
  const std::vector<double> x = {11.0, 9.7, 11.3, 13.0, 9.5, 9.5,  13.2, 11.5, 9.1, 11.1,
                                 9.1,  9.1, 10.5, 6.2,  6.6, 8.9,  8.0,  10.6, 8.2, 7.2,
                                 12.9, 9.5, 10.1, 7.2,  8.9, 10.2, 7.7,  10.8, 8.8, 9.4};
  const std::vector<double> y = {10.8, 12.0, 11.7, 12.3, 10.7, 8.7,  13.8, 9.9,  8.2, 11.7,
                                 10.2, 9.7,  10.8, 6.3,  5.5,  8.6,  7.9,  12.1, 8.9, 5.8,
                                 13.6, 9.5,  9.8,  8.2,  10.3, 11.5, 7.3,  10.9, 9.5, 10.8};
  const auto result =
      wilcoxon_signed_rank(std::span<const std::pair<double, double>>(pair_up(x, y)));
  CHECK(result.w == 149.0);
  CHECK(result.n_used == 29);
  CHECK_FALSE(result.exact);
  CHECK_THAT(result.p_value, Catch::Matchers::WithinRel(0.14128499720314858, 1e-12));
  CHECK_FALSE(result.significant);
}

TEST_CASE("exact p-values equal brute-force sign enumeration", "[analysis]") {
  Rng rng(71);
  int degenerate = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.uniform_index(12);
    std::vector<double> diffs(n);
    bool all_zero = true;
    for (double& d : diffs) {
      d = static_cast<double>(rng.uniform_int(-5, 5)) * 0.5;
      if (d != 0.0) all_zero = false;
    }
    std::vector<std::pair<double, double>> pairs;
    for (const double d : diffs) pairs.emplace_back(d, 0.0);

    if (all_zero) {
      CHECK_THROWS_AS(
          wilcoxon_signed_rank(std::span<const std::pair<double, double>>(pairs)),
          DegenerateSampleError);
      ++degenerate;
      continue;
    }
    const auto result =
        wilcoxon_signed_rank(std::span<const std::pair<double, double>>(pairs));
    const auto [w_ref, p_ref] = brute_wilcoxon(diffs);
    CHECK(result.w == w_ref);
    CHECK_THAT(result.p_value, Catch::Matchers::WithinAbs(p_ref, 1e-12));
    CHECK(result.exact);
    CHECK(result.significant == (result.p_value < 0.05 && result.n_used >= 6));
  }
  CHECK(degenerate < 50);  // the property actually exercised the test path
}

TEST_CASE("five informative pairs can never reach significance", "[analysis]") {
  const auto result = wilcoxon_signed_rank(std::span<const std::pair<double, double>>(
      pair_up({2, 3, 4, 5, 6}, {1, 1, 1, 1, 1})));
  CHECK(result.w == 0.0);
  CHECK(result.p_value == 0.0625);  // 2/32, above alpha by construction
  CHECK(result.n_used == 5);
  CHECK_FALSE(result.significant);
}

TEST_CASE("swapping sides preserves the statistic and p-value", "[analysis]") {
  Rng rng(72);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> a(10), b(10);
    for (std::size_t i = 0; i < 10; ++i) {
      a[i] = rng.uniform_real() * 10.0;
      b[i] = rng.uniform_real() * 10.0;
    }
    const auto ab = wilcoxon_signed_rank(std::span<const std::pair<double, double>>(pair_up(a, b)));
    const auto ba = wilcoxon_signed_rank(std::span<const std::pair<double, double>>(pair_up(b, a)));
    CHECK(ab.w == ba.w);
    CHECK(ab.p_value == ba.p_value);

    // Equal sign and rank patterns give equal results: scale every value.
    std::vector<double> a3(10), b3(10);
    for (std::size_t i = 0; i < 10; ++i) {
      a3[i] = 3.0 * a[i];
      b3[i] = 3.0 * b[i];
    }
    const auto scaled =
        wilcoxon_signed_rank(std::span<const std::pair<double, double>>(pair_up(a3, b3)));
    CHECK(scaled.w == ab.w);
    CHECK(scaled.p_value == ab.p_value);
  }
}

TEST_CASE("chi-square tail probabilities match reference values", "[analysis]") {
  CHECK_THAT(detail::chi_squared_upper_tail(3.841458820694124, 1),
             Catch::Matchers::WithinAbs(0.05, 1e-12));
  CHECK_THAT(detail::chi_squared_upper_tail(1.0, 1),
             Catch::Matchers::WithinRel(0.31731050786291115, 1e-12));
  CHECK_THAT(detail::chi_squared_upper_tail(10.0, 4),
             Catch::Matchers::WithinRel(0.04042768199451279, 1e-12));
  CHECK(detail::chi_squared_upper_tail(0.0, 3) == 1.0);
}

TEST_CASE("homogeneity statistics match reference values", "[analysis]") {
  const std::vector<std::vector<double>> equal_var = {{1, 2, 3}, {4, 5, 6}};
  const auto flat = bartlett(equal_var);
  CHECK(flat.statistic == 0.0);
  CHECK(flat.p_value == 1.0);

  const std::vector<std::vector<double>> spread = {{1, 2, 3}, {10, 20, 30}};
  const auto wide = bartlett(spread);
  CHECK_THAT(wide.statistic, Catch::Matchers::WithinRel(5.182042378519259, 1e-12));
  CHECK_THAT(wide.p_value, Catch::Matchers::WithinRel(0.022821483153810808, 1e-12));

  const std::vector<std::vector<double>> three = {{4.1, 5.2, 6.3, 7.1, 8.0},
                                                  {3.9, 5.5, 6.1, 7.7},
                                                  {10.0, 10.5, 11.5, 12.0, 13.5, 14.0}};
  const auto trio = bartlett(three);
  CHECK_THAT(trio.statistic, Catch::Matchers::WithinRel(0.0052740682087140875, 1e-12));
  CHECK_THAT(trio.p_value, Catch::Matchers::WithinRel(0.9973664398157905, 1e-12));

  CHECK_THROWS_AS(bartlett(std::vector<std::vector<double>>{{1, 2, 3}}), std::invalid_argument);
  CHECK_THROWS_AS(bartlett(std::vector<std::vector<double>>{{1, 2}, {3}}), std::invalid_argument);
  CHECK_THROWS_AS(bartlett(std::vector<std::vector<double>>{{1, 2, 3}, {5, 5, 5}}),
                  DegenerateSampleError);
}

TEST_CASE("comparison rows pick winners from the means alone", "[analysis]") {
  PairedSample sample;
  sample.label_a = "pimp";
  sample.label_b = "tournament";
  for (int i = 0; i < 30; ++i) sample.values.emplace_back(3.7e-4, 1.4e-3);

  const ComparisonRow fitness = compare(sample, CompareMetric::FinalBestFitness);
  CHECK(fitness.metric == "final_best_fitness");
  CHECK_THAT(fitness.mean_a, Catch::Matchers::WithinRel(3.7e-4, 1e-14));
  CHECK_THAT(fitness.mean_b, Catch::Matchers::WithinRel(1.4e-3, 1e-14));
  CHECK_THAT(fitness.sd_a, Catch::Matchers::WithinAbs(0.0, 1e-15));
  CHECK(fitness.winner == "a");
  CHECK(fitness.significant);  // thirty uniform-sign differences

  const ComparisonRow unique = compare(sample, CompareMetric::UniqueSolutionFraction);
  CHECK(unique.winner == "b");  // higher is better for diversity
  CHECK(unique.p_value == fitness.p_value);

  const ComparisonRow depth = compare(sample, CompareMetric::MeanSolutionDepth);
  CHECK(depth.winner == "a");

  PairedSample identical;
  for (int i = 0; i < 30; ++i) identical.values.emplace_back(0.25, 0.25);
  const ComparisonRow tie = compare(identical, CompareMetric::FinalBestFitness);
  CHECK(tie.winner == "none");
  CHECK(tie.p_value == 1.0);
  CHECK_FALSE(tie.significant);
}

TEST_CASE("metric descriptors expose names and orientations", "[analysis]") {
  CHECK(std::string(metric_name(CompareMetric::FinalBestFitness)) == "final_best_fitness");
  CHECK(std::string(metric_name(CompareMetric::UniqueSolutionFraction)) ==
        "unique_solution_fraction");
  CHECK(std::string(metric_name(CompareMetric::MeanSolutionDepth)) == "mean_solution_depth");
  CHECK(lower_is_better(CompareMetric::FinalBestFitness));
  CHECK_FALSE(lower_is_better(CompareMetric::UniqueSolutionFraction));
  CHECK(lower_is_better(CompareMetric::MeanSolutionDepth));
}
