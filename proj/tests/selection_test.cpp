#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "oracles.hpp"
#include "zpd/error.hpp"
#include "zpd/selection.hpp"

using namespace zpd;

namespace {

std::vector<CalibratedItem> items_from(const std::vector<double>& b) {
  std::vector<CalibratedItem> items(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) {
    items[i].id = "i" + std::to_string(i);
    items[i].b = b[i];
  }
  return items;
}

std::set<std::string> selected_set(const Selection& s) {
  const auto ids = s.selected_ids();
  return {ids.begin(), ids.end()};
}

}  // namespace

TEST_CASE("zpd_score examples") {
  CHECK(zpd_score(0.5) == 0.25);
  CHECK(zpd_score(0.0) == 0.0);
  CHECK(zpd_score(1.0) == 0.0);
  CHECK(zpd_score(0.1) == doctest::Approx(0.09).epsilon(1e-15));
  CHECK_THROWS_AS(zpd_score(-1e-9), std::invalid_argument);
  CHECK_THROWS_AS(zpd_score(1.0 + 1e-9), std::invalid_argument);
  CHECK_THROWS_AS(zpd_score(std::nan("")), std::invalid_argument);
}

TEST_CASE("zpd_score is symmetric, bounded and peaks at one half") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double p = u(rng);
    const double s = zpd_score(p);
    CHECK(std::abs(s - zpd_score(1.0 - p)) <= 1e-12);
    CHECK(s >= 0.0);
    CHECK(s <= 0.25);
  }
}

TEST_CASE("budget_size is the ceiling of rho N") {
  CHECK(budget_size(0.1, 1000) == 100);
  CHECK(budget_size(0.15, 1000) == 150);
  CHECK(budget_size(0.07, 100) == 7);
  CHECK(budget_size(0.01, 50) == 1);
  CHECK(budget_size(0.011, 100) == 2);
  CHECK(budget_size(1.0, 13) == 13);
  CHECK(budget_size(1e-9, 10) == 1);
  CHECK_THROWS_AS(budget_size(0.0, 10), ConfigError);
  CHECK_THROWS_AS(budget_size(1.5, 10), ConfigError);
  CHECK_THROWS_AS(budget_size(-0.1, 10), ConfigError);
}

TEST_CASE("parse_selection_mode") {
  CHECK(parse_selection_mode("ZPD") == SelectionMode::kZpd);
  CHECK(parse_selection_mode("easy") == SelectionMode::kEasy);
  CHECK(parse_selection_mode("Hard") == SelectionMode::kHard);
  CHECK(to_string(SelectionMode::kHard) == "hard");
  CHECK_THROWS_AS(parse_selection_mode("medium"), ConfigError);
}

TEST_CASE("rank_and_select: three items centred on theta") {
  const auto items = items_from({1.0, 0.0, 1.0});
  const auto s = rank_and_select(items, 0.0, 1.0 / 3.0);
  CHECK(s.k == 1);
  REQUIRE(s.samples.size() == 3);
  CHECK(s.samples[0].id == "i1");
  CHECK(s.samples[0].p == 0.5);
  CHECK(s.samples[0].zpd_score == 0.25);
  CHECK(s.samples[0].selected);
  // Equal scores keep input order.
  CHECK(s.samples[1].id == "i0");
  CHECK(s.samples[2].id == "i2");
  CHECK_FALSE(s.samples[1].selected);
}

TEST_CASE("ranking invariants") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> ut(-2.5, 2.5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto items = oracle::random_calibrated(rng, 1 + rng() % 300);
    const double rho = 0.01 + 0.99 * std::uniform_real_distribution<double>(0, 1)(rng);
    const auto s = rank_and_select(items, ut(rng), rho);
    REQUIRE(s.samples.size() == items.size());
    CHECK(s.k == budget_size(rho, items.size()));
    std::size_t selected = 0;
    for (std::size_t r = 0; r < s.samples.size(); ++r) {
      CHECK(s.samples[r].rank == r + 1);
      CHECK(s.samples[r].selected == (r < s.k));
      selected += s.samples[r].selected;
      if (r > 0) CHECK(s.samples[r - 1].zpd_score >= s.samples[r].zpd_score);
    }
    CHECK(selected == s.k);
  }
}

TEST_CASE("selected set matches full-sort and nearest-difficulty oracles") {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> ut(-2.5, 2.5);
  for (int trial = 0; trial < 40; ++trial) {
    const auto items = oracle::random_calibrated(rng, 1000);
    const double theta = ut(rng);
    for (double rho : {0.01, 0.05, 0.10, 0.15}) {
      const auto s = rank_and_select(items, theta, rho);
      const auto got = selected_set(s);
      CHECK(got == oracle::topk_by_score(items, theta, s.k));
      CHECK(got == oracle::topk_by_distance(items, theta, s.k));
    }
  }
}

TEST_CASE("selection is permutation-equivariant as a set") {
  std::mt19937_64 rng(15);
  for (int trial = 0; trial < 30; ++trial) {
    auto items = oracle::random_calibrated(rng, 200);
    const auto before = selected_set(rank_and_select(items, 0.4, 0.1));
    std::shuffle(items.begin(), items.end(), rng);
    CHECK(selected_set(rank_and_select(items, 0.4, 0.1)) == before);
  }
}

TEST_CASE("larger budgets contain smaller ones") {
  std::mt19937_64 rng(16);
  for (int trial = 0; trial < 30; ++trial) {
    const auto items = oracle::random_calibrated(rng, 500);
    std::set<std::string> previous;
    for (double rho : {0.01, 0.05, 0.10, 0.15, 0.5, 1.0}) {
      const auto current = selected_set(rank_and_select(items, -0.3, rho));
      CHECK(std::includes(current.begin(), current.end(), previous.begin(), previous.end()));
      previous = current;
    }
  }
}

TEST_CASE("EASY and HARD partitions order by difficulty") {
  const auto items = items_from({0.5, -1.0, 2.0, -1.0, 0.0});
  const auto easy = partition(items, 0.0, 0.4, SelectionMode::kEasy);
  CHECK(easy.k == 2);
  CHECK(easy.selected_ids() == std::vector<std::string>{"i1", "i3"});
  const auto hard = partition(items, 0.0, 0.4, SelectionMode::kHard);
  CHECK(hard.selected_ids() == std::vector<std::string>{"i2", "i0"});
  // EASY and HARD ignore theta.
  CHECK(partition(items, 5.0, 0.4, SelectionMode::kEasy).selected_ids() ==
        easy.selected_ids());
}

TEST_CASE("three partitions on symmetric difficulties") {
  std::vector<double> b;
  for (int i = 0; i < 100; ++i) b.push_back(-3.0 + 6.0 * i / 99.0);
  const auto items = items_from(b);
  const auto easy = selected_set(partition(items, 0.0, 0.1, SelectionMode::kEasy));
  const auto zpd = selected_set(partition(items, 0.0, 0.1, SelectionMode::kZpd));
  const auto hard = selected_set(partition(items, 0.0, 0.1, SelectionMode::kHard));
  for (const auto& id : zpd) {
    CHECK_FALSE(easy.contains(id));
    CHECK_FALSE(hard.contains(id));
  }
  for (const auto& id : easy) CHECK_FALSE(hard.contains(id));
}

TEST_CASE("partition_count rejects bad arguments") {
  const auto items = items_from({0.0, 1.0});
  CHECK_THROWS_AS(partition_count(items, 0.0, 0, 0.5, SelectionMode::kZpd),
                  std::invalid_argument);
  CHECK_THROWS_AS(partition_count(items, 0.0, 3, 0.5, SelectionMode::kZpd),
                  std::invalid_argument);
  CHECK_THROWS_AS(rank_and_select(items, std::nan(""), 0.5), std::invalid_argument);
  CHECK_THROWS_AS(rank_and_select(std::vector<CalibratedItem>{}, 0.0, 0.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(rank_and_select(items, 0.0, 0.0), ConfigError);
}
