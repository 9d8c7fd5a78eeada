#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "aqs/inference.hpp"

using namespace aqs;

namespace {

// composite Simpson of the Beta(a,b) density on [0, x]; assumes a, b >= 1 so
// the integrand vanishes at the endpoints
double beta_cdf_oracle(double a, double b, double x, int n = 400000) {
  const double ln_b = std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
  auto f = [&](double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    return std::exp((a - 1.0) * std::log(t) + (b - 1.0) * std::log1p(-t) - ln_b);
  };
  const double h = x / n;
  double s = f(0.0) + f(x);
  for (int i = 1; i < n; ++i) s += f(i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

double median(std::vector<int> v) {
  std::nth_element(v.begin(), v.begin() + v.size() / 2, v.end());
  return v[v.size() / 2];
}

}  // namespace

TEST_CASE("conjugate updates") {
  BetaPosterior prior{10.0, 2.0};
  auto post = update(prior, true);
  CHECK(post.a == 11.0);
  CHECK(post.b == 2.0);
  CHECK(beta_mean(prior) == doctest::Approx(10.0 / 12.0).epsilon(1e-12));
  CHECK(beta_variance(prior) == doctest::Approx(20.0 / (144.0 * 13.0)).epsilon(1e-12));

  // order independence: 3 successes and 2 failures land on (4, 3) however mixed
  for (auto seq : {std::vector<int>{1, 1, 1, 0, 0}, {0, 1, 1, 0, 1}, {1, 0, 1, 0, 1}}) {
    BetaPosterior p{1.0, 1.0};
    for (int x : seq) p = update(p, x == 1);
    CHECK(p.a == 4.0);
    CHECK(p.b == 3.0);
  }
  CHECK_THROWS_AS((void)beta_mean(BetaPosterior{0.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS((void)update(BetaPosterior{1.0, -2.0}, true), std::invalid_argument);
}

TEST_CASE("incomplete beta matches numeric integration") {
  CHECK(regularized_incomplete_beta(10.0, 2.0, 0.85) ==
        doctest::Approx(beta_cdf_oracle(10.0, 2.0, 0.85)).epsilon(1e-9));
  CHECK(regularized_incomplete_beta(3.0, 7.0, 0.3) ==
        doctest::Approx(beta_cdf_oracle(3.0, 7.0, 0.3)).epsilon(1e-9));
  CHECK(std::abs(regularized_incomplete_beta(1000.0, 10.0, 0.995) -
                 beta_cdf_oracle(1000.0, 10.0, 0.995)) < 1e-8);
  CHECK(regularized_incomplete_beta(1000.0, 10.0, 0.85) < 1e-30);  // far-left tail
  CHECK(regularized_incomplete_beta(5.0, 3.0, 0.0) == 0.0);
  CHECK(regularized_incomplete_beta(5.0, 3.0, 1.0) == 1.0);

  // reflection identity and monotonicity in x
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const double a = 0.5 + 20.0 * u(rng), b = 0.5 + 20.0 * u(rng);
    const double x = u(rng);
    CHECK(regularized_incomplete_beta(a, b, x) ==
          doctest::Approx(1.0 - regularized_incomplete_beta(b, a, 1.0 - x)).epsilon(1e-10));
    const double y = std::min(1.0, x + 0.1);
    CHECK(regularized_incomplete_beta(a, b, y) >= regularized_incomplete_beta(a, b, x) - 1e-12);
  }
  CHECK_THROWS_AS((void)regularized_incomplete_beta(-1.0, 2.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS((void)regularized_incomplete_beta(1.0, 2.0, 1.5), std::invalid_argument);
}

TEST_CASE("tail errors around the blind interval") {
  auto sym = alpha_errors(BetaPosterior{7.0, 7.0}, 0.5, 0.1);
  CHECK(sym.left == doctest::Approx(sym.right).epsilon(1e-12));

  auto sharp = alpha_errors(BetaPosterior{1000.0, 10.0}, 0.9, 0.05);
  CHECK(sharp.left < 1e-12);   // essentially no mass below 0.85
  CHECK(sharp.right > 0.9);    // nearly everything sits above 0.95

  auto fuzzy = alpha_errors(BetaPosterior{10.0, 2.0}, 0.9, 0.05);
  CHECK(fuzzy.left > 0.05);    // prior alone cannot decide either way
  CHECK(fuzzy.right > 0.05);

  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-1.0, 5.0);
  for (int trial = 0; trial < 200; ++trial) {
    BetaPosterior p{std::exp(u(rng)), std::exp(u(rng))};
    auto err = alpha_errors(p, 0.5, 0.1);
    CHECK(err.left + err.right <= 1.0 + 1e-12);
    CHECK(err.left >= 0.0);
    CHECK(err.right >= 0.0);
  }
  CHECK_THROWS_AS((void)alpha_errors(BetaPosterior{1, 1}, 0.05, 0.1), std::invalid_argument);
  CHECK_THROWS_AS((void)alpha_errors(BetaPosterior{1, 1}, 0.97, 0.05), std::invalid_argument);
  CHECK_THROWS_AS((void)alpha_errors(BetaPosterior{1, 1}, 0.5, -0.1), std::invalid_argument);
}

TEST_CASE("sequential test accepts a strongly overlapping state quickly") {
  std::mt19937_64 rng(404);
  std::bernoulli_distribution good(0.99);
  int accepted = 0;
  std::vector<int> used;
  for (int run = 0; run < 1000; ++run) {
    auto res = decide([&] { return good(rng); }, 0.9, 0.05, 0.05, 200, {10.0, 2.0});
    if (res.decision == Decision::accept) ++accepted;
    used.push_back(res.samples_used);
  }
  // At a fixed 5% stopping threshold a single very early failure can push the
  // right tail under the bar, so a few percent of runs stop wrong; correctness
  // approaches 1 as the threshold tightens (next case), which is exactly the
  // prescribed reaction to an undecided outcome.
  CHECK(accepted >= 900);
  CHECK(median(used) < 25);
}

TEST_CASE("tightening the threshold drives the correct-decision rate up") {
  std::mt19937_64 rng(404);
  std::bernoulli_distribution good(0.99);
  int accepted = 0;
  for (int run = 0; run < 1000; ++run) {
    auto res = decide([&] { return good(rng); }, 0.9, 0.05, 0.01, 400, {10.0, 2.0});
    if (res.decision == Decision::accept) ++accepted;
  }
  CHECK(accepted >= 950);
}

TEST_CASE("sequential test rejects a poor state quickly") {
  std::mt19937_64 rng(405);
  std::bernoulli_distribution poor(0.5);
  int rejected = 0;
  std::vector<int> used;
  for (int run = 0; run < 1000; ++run) {
    auto res = decide([&] { return poor(rng); }, 0.9, 0.05, 0.05, 200, {10.0, 2.0});
    if (res.decision == Decision::reject) ++rejected;
    used.push_back(res.samples_used);
  }
  CHECK(rejected >= 950);
  CHECK(median(used) <= 10);
}

TEST_CASE("sample demand diverges as the blind interval shrinks") {
  std::mt19937_64 rng(406);
  std::bernoulli_distribution borderline(0.85);  // p_true right at h0
  double first_mean = 0.0, prev_mean = 0.0;
  int prev_undecided = 0;
  for (double eps : {0.1, 0.03, 0.01}) {
    long total = 0;
    int undecided = 0;
    for (int run = 0; run < 200; ++run) {
      auto res = decide([&] { return borderline(rng); }, 0.85, eps, 0.05, 400, {1.0, 1.0});
      total += res.samples_used;
      if (res.decision == Decision::undecided) ++undecided;
    }
    const double mean = static_cast<double>(total) / 200.0;
    CHECK(mean > prev_mean);
    CHECK(undecided >= prev_undecided);
    if (first_mean == 0.0) first_mean = mean;
    prev_mean = mean;
    prev_undecided = undecided;
  }
  CHECK(prev_mean > 10.0 * first_mean);  // an order of magnitude per decade of eps
  CHECK(prev_undecided >= 10);           // budget exhaustion starts to appear
}

TEST_CASE("decision bookkeeping and validation") {
  std::mt19937_64 rng(7);
  std::bernoulli_distribution coin(0.8);
  auto draw = [&] { return coin(rng); };
  auto res = decide(draw, 0.7, 0.05, 0.05, 50, {1.0, 1.0});
  CHECK(res.samples_used <= 50);
  REQUIRE(res.trace.size() == static_cast<std::size_t>(res.samples_used));
  CHECK(res.posterior.a + res.posterior.b == doctest::Approx(2.0 + res.samples_used));
  double a = 1.0, b = 1.0;
  for (const auto& row : res.trace) {
    CHECK((row.outcome == 0 || row.outcome == 1));
    if (row.outcome == 1) a += 1.0; else b += 1.0;
    CHECK(row.a == a);
    CHECK(row.b == b);
    CHECK(row.left_err >= 0.0);
    CHECK(row.left_err <= 1.0);
    CHECK(row.right_err >= 0.0);
    CHECK(row.right_err <= 1.0);
  }
  auto last = alpha_errors(res.posterior, 0.7, 0.05);
  CHECK(res.trace.back().left_err == doctest::Approx(last.left).epsilon(1e-14));
  CHECK(res.trace.back().right_err == doctest::Approx(last.right).epsilon(1e-14));

  CHECK_THROWS_AS((void)decide(draw, 0.7, 0.05, 0.0, 50), std::invalid_argument);
  CHECK_THROWS_AS((void)decide(draw, 0.7, 0.05, 0.6, 50), std::invalid_argument);
  CHECK_THROWS_AS((void)decide(draw, 0.7, 0.05, 0.05, 0), std::invalid_argument);
  CHECK_THROWS_AS((void)decide(draw, 0.05, 0.1, 0.05, 50), std::invalid_argument);
  CHECK_THROWS_AS((void)decide(nullptr, 0.7, 0.05, 0.05, 50), std::invalid_argument);
}

TEST_CASE("measurement planning via the Hoeffding bound") {
  CHECK(hoeffding_samples(0.1, 0.5) == 139);
  CHECK(hoeffding_samples(0.1, 0.5, 1.0) == 35);
  CHECK(hoeffding_samples(0.05, 0.5) > hoeffding_samples(0.1, 0.5));
  CHECK(hoeffding_samples(0.1, 0.1) > hoeffding_samples(0.1, 0.5));
  CHECK(hoeffding_samples(0.1, 0.999999) <= 1);  // vanishing demand as eta -> 1
  for (double eps : {0.02, 0.1, 0.3})
    for (double eta : {0.05, 0.4}) {
      const double expect = 2.0 * std::log(1.0 / eta) / (eps * eps);
      CHECK(hoeffding_samples(eps, eta) == static_cast<int>(std::ceil(expect - 1e-12)));
    }
  CHECK_THROWS_AS((void)hoeffding_samples(0.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS((void)hoeffding_samples(0.1, 1.0), std::invalid_argument);
  CHECK_THROWS_AS((void)hoeffding_samples(0.1, 0.5, 0.0), std::invalid_argument);
}
