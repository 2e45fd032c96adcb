#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "zpd/rasch.hpp"

using namespace zpd;

namespace {

// Root of sigma(t+1) + sigma(t) + sigma(t-1) = 2, solved offline to 30 digits.
constexpr double kThreeItemRoot = 0.802934381116039085465416711781;

const std::vector<ResponseItem> kThreeItems = {{-1.0, true}, {0.0, true}, {1.0, false}};

}  // namespace

TEST_CASE("success_probability") {
  CHECK(success_probability(1.7, 1.7) == 0.5);
  CHECK(std::abs(success_probability(30.0, 0.0) - 1.0) <= 1e-12);
  CHECK(success_probability(0.0, 30.0) <= 1e-12);
  CHECK(success_probability(std::log(3.0), 0.0) == doctest::Approx(0.75).epsilon(1e-15));
  for (double x : {-800.0, -700.0, 700.0, 800.0}) {
    const double p = success_probability(x, 0.0);
    CHECK(std::isfinite(p));
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
  }
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  for (int i = 0; i < 1000; ++i) {
    const double t = u(rng);
    const double b = u(rng);
    CHECK(success_probability(t, b) ==
          doctest::Approx(static_cast<double>(oracle::sigmoid(t - b))).epsilon(1e-14));
  }
}

TEST_CASE("log_likelihood") {
  const std::vector<ResponseItem> one = {{0.3, true}};
  CHECK(log_likelihood(0.3, one) == doctest::Approx(std::log(0.5)).epsilon(1e-15));
  const std::vector<ResponseItem> two = {{0.3, true}, {0.3, false}};
  CHECK(log_likelihood(0.3, two) == doctest::Approx(2.0 * std::log(0.5)).epsilon(1e-15));
  CHECK_THROWS_AS(log_likelihood(0.0, std::vector<ResponseItem>{}), std::invalid_argument);

  // Saturated terms stay finite.
  const std::vector<ResponseItem> far = {{-800.0, false}};
  CHECK(log_likelihood(0.0, far) == doctest::Approx(-800.0));

  std::mt19937_64 rng(2);
  const auto items = oracle::random_items(rng, 50);
  std::uniform_real_distribution<double> ut(-4.0, 4.0);
  for (int i = 0; i < 20; ++i) {
    const double t = ut(rng);
    CHECK(std::abs(log_likelihood(t, items) - oracle::log_likelihood(t, items)) <= 1e-10);
  }
}

TEST_CASE("score_gap") {
  const std::vector<ResponseItem> single = {{0.0, true}};
  CHECK(score_gap(0.0, single) == 0.5);
  const std::vector<ResponseItem> all_right = {{0.0, true}, {1.0, true}, {-2.0, true}};
  for (double t : {0.0, 10.0, 30.0, 60.0, 500.0}) CHECK(score_gap(t, all_right) >= 0.0);
  CHECK_THROWS_AS(score_gap(0.0, std::vector<ResponseItem>{}), std::invalid_argument);
}

TEST_CASE("score_gap matches a finite difference of the log-likelihood") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ut(-4.0, 4.0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto items = oracle::random_items(rng, 1 + rng() % 60);
    const double t = ut(rng);
    const auto ll = [&](double x) { return oracle::log_likelihood(x, items); };
    CHECK(std::abs(score_gap(t, items) - oracle::central_difference(ll, t, 1e-5)) <= 1e-6);
  }
}

TEST_CASE("score_gap decreases and log_likelihood is concave on a grid") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const auto items = oracle::random_items(rng, 5 + rng() % 100);
    const auto ll = [&](double x) { return log_likelihood(x, items); };
    double previous = score_gap(-10.0, items);
    for (int i = 1; i < 100; ++i) {
      const double t = -10.0 + 20.0 * i / 99.0;
      const double g = score_gap(t, items);
      CHECK(g < previous);
      previous = g;
      CHECK(oracle::second_difference(ll, t, 1e-3) <= 1e-6);
    }
  }
}

TEST_CASE("estimate_ability: three-item example") {
  const auto est = estimate_ability(kThreeItems);
  CHECK_FALSE(est.clamped);
  CHECK(std::abs(est.theta - kThreeItemRoot) <= 1e-6);
  CHECK(est.count_gap <= 1.0);
  CHECK(est.iterations > 0);
  const auto grid = estimate_ability_grid(kThreeItems, 1e-4);
  CHECK(std::abs(est.theta - grid.theta) <= 1e-3);
}

TEST_CASE("estimate_ability: unbounded patterns clamp to the interval") {
  const std::vector<ResponseItem> right = {{0.0, true}, {0.0, true}};
  const auto up = estimate_ability(right);
  CHECK(up.theta == 30.0);
  CHECK(up.clamped);
  CHECK(up.iterations == 0);

  const std::vector<ResponseItem> wrong = {{-1.0, false}, {2.0, false}};
  const auto down = estimate_ability(wrong);
  CHECK(down.theta == -31.0);
  CHECK(down.clamped);
}

TEST_CASE("estimate_ability: symmetric pattern lands exactly on zero") {
  const std::vector<ResponseItem> items = {{-2.0, false}, {2.0, true}};
  const auto est = estimate_ability(items);
  CHECK(est.theta == 0.0);
  CHECK(est.count_gap == 0.0);
  CHECK_FALSE(est.clamped);
}

TEST_CASE("estimate_ability rejects bad input") {
  CHECK_THROWS_AS(estimate_ability(std::vector<ResponseItem>{}), std::invalid_argument);
  const std::vector<ResponseItem> bad = {{std::numeric_limits<double>::infinity(), true},
                                         {0.0, false}};
  CHECK_THROWS_AS(estimate_ability(bad), std::invalid_argument);
  CHECK_THROWS_AS(estimate_ability_grid(bad, 0.1), std::invalid_argument);
}

TEST_CASE("either-test stopping halts on the count criterion alone") {
  BisectionOptions loose;
  loose.stop_rule = StopRule::kStepOrCount;
  // The first midpoint (0) already has expected count 1.5 against 2 observed.
  const auto est = estimate_ability(kThreeItems, loose);
  CHECK(est.iterations == 1);
  CHECK(est.theta == 0.0);
  CHECK(est.count_gap <= 1.0);
  CHECK(std::abs(est.theta - kThreeItemRoot) > 0.5);
}

TEST_CASE("count gap postcondition and long-double root agreement") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ut(-2.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    const auto items = oracle::random_items(rng, 2 + rng() % 300, -3.0, 3.0, ut(rng));
    for (auto rule : {StopRule::kStepAndCount, StopRule::kStepOrCount}) {
      BisectionOptions options;
      options.stop_rule = rule;
      const auto est = estimate_ability(items, options);
      if (est.clamped) continue;
      CHECK(est.count_gap <= 1.0);
      CHECK(std::abs(score_gap(est.theta, items)) == est.count_gap);
    }
    const auto est = estimate_ability(items);
    if (est.clamped) continue;
    const auto interval = search_interval(items);
    CHECK(std::abs(est.theta - oracle::count_matching_root(items, interval.lower,
                                                           interval.upper)) <= 2e-6);
  }
}

TEST_CASE("translation equivariance") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> shift(-10.0, 10.0);
  for (int trial = 0; trial < 50; ++trial) {
    auto items = oracle::random_items(rng, 10 + rng() % 200);
    const auto base = estimate_ability(items);
    if (base.clamped) continue;
    const double c = shift(rng);
    for (auto& item : items) item.b += c;
    CHECK(std::abs(estimate_ability(items).theta - (base.theta + c)) <= 1e-6);
  }
}

TEST_CASE("flipping a wrong answer to right raises the estimate") {
  std::mt19937_64 rng(7);
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    auto items = oracle::random_items(rng, 20 + rng() % 100);
    const auto before = estimate_ability(items);
    std::vector<std::size_t> wrong;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (!items[i].correct) wrong.push_back(i);
    }
    if (wrong.size() < 2 || before.clamped) continue;
    // b lies in [-3, 3] and both outcomes occur, so the maximiser is well
    // inside [-12, 12].
    const double grid_before = oracle::grid_argmax(items, -12.0, 12.0, 2e-2);
    items[wrong[rng() % wrong.size()]].correct = true;
    const auto after = estimate_ability(items);
    if (after.clamped) continue;
    CHECK(after.theta > before.theta);
    CHECK(oracle::grid_argmax(items, -12.0, 12.0, 2e-2) >= grid_before);
    ++checked;
  }
  CHECK(checked > 30);
}

TEST_CASE("grid estimator: endpoints and degenerate grids") {
  const std::vector<ResponseItem> single = {{0.5, true}};
  CHECK(estimate_ability_grid(single, 0.01).theta == 30.5);
  CHECK(estimate_ability_grid(single, 0.01).clamped);
  // Step wider than the whole interval: only the two endpoints exist.
  const auto wide = estimate_ability_grid(kThreeItems, 1000.0);
  CHECK((wide.theta == -31.0 || wide.theta == 31.0));
  CHECK_THROWS_AS(estimate_ability_grid(kThreeItems, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(estimate_ability_grid(kThreeItems, -1.0), std::invalid_argument);
}

TEST_CASE("grid estimator breaks exact ties toward smaller theta") {
  // log L is symmetric about 0 here, and the step-2 grid holds both -1 and 1
  // but not 0.
  const std::vector<ResponseItem> items = {{-1.0, true}, {1.0, false}};
  CHECK(estimate_ability_grid(items, 2.0).theta == -1.0);
  CHECK(estimate_ability_grid_exhaustive(items, 2.0).theta == -1.0);
}

TEST_CASE("pruned grid search equals exhaustive grid search") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> ut(-2.0, 2.0);
  for (int trial = 0; trial < 30; ++trial) {
    const auto items = oracle::random_items(rng, 1 + rng() % 80, -3.0, 3.0, ut(rng));
    for (double step : {0.37, 1e-2}) {
      const auto pruned = estimate_ability_grid(items, step);
      const auto full = estimate_ability_grid_exhaustive(items, step);
      CHECK(pruned.theta == full.theta);
    }
    const auto interval = search_interval(items);
    CHECK(std::abs(estimate_ability_grid(items, 1e-2).theta -
                   oracle::grid_argmax(items, interval.lower, interval.upper, 1e-2)) <= 1e-2);
  }
}

TEST_CASE("bisection agrees with the grid oracle") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> ut(-2.0, 2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const auto items = oracle::random_items(rng, 500, -3.0, 3.0, ut(rng));
    const auto est = estimate_ability(items);
    const auto grid = estimate_ability_grid(items, 1e-4);
    CHECK(std::abs(est.theta - grid.theta) <= 1e-3);
  }
}
