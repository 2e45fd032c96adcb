#include "zpd/rasch.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <stdexcept>
#include <vector>

namespace zpd {
namespace {

void require_items(std::span<const ResponseItem> items, const char* who) {
  if (items.empty()) {
    throw std::invalid_argument(std::string(who) + ": empty item list");
  }
}

void require_finite(std::span<const ResponseItem> items, const char* who) {
  for (const auto& item : items) {
    if (!std::isfinite(item.b)) {
      throw std::invalid_argument(std::string(who) + ": non-finite item difficulty");
    }
  }
}

// Grid lower, lower + step, ..., with the upper endpoint appended when it is
// not itself a lattice point.
class Grid {
 public:
  Grid(SearchInterval interval, double step) : interval_(interval), step_(step) {
    const double cells = std::floor((interval.upper - interval.lower) / step);
    lattice_points_ = static_cast<std::int64_t>(cells) + 1;
    size_ = lattice_points_;
    if (interval.lower + cells * step < interval.upper) ++size_;
  }

  std::int64_t size() const { return size_; }

  double at(std::int64_t j) const {
    if (j >= lattice_points_) return interval_.upper;
    return interval_.lower + static_cast<double>(j) * step_;
  }

 private:
  SearchInterval interval_;
  double step_;
  std::int64_t lattice_points_ = 0;
  std::int64_t size_ = 0;
};

AbilityEstimate grid_result(std::span<const ResponseItem> items,
                            SearchInterval interval, double theta,
                            std::int64_t evaluations) {
  AbilityEstimate est;
  est.theta = theta;
  est.iterations = static_cast<int>(std::min<std::int64_t>(
      evaluations, std::numeric_limits<int>::max()));
  est.clamped = theta == interval.lower || theta == interval.upper;
  est.count_gap = std::abs(score_gap(theta, items));
  return est;
}

void require_step(double step) {
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw std::invalid_argument("estimate_ability_grid: step must be finite and > 0");
  }
}

}  // namespace

double success_probability(double theta, double b) {
  const double x = theta - b;
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double log_sigmoid(double x) {
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

double log_likelihood(double theta, std::span<const ResponseItem> items) {
  require_items(items, "log_likelihood");
  double sum = 0.0;
  for (const auto& item : items) {
    const double x = theta - item.b;
    sum += item.correct ? log_sigmoid(x) : log_sigmoid(-x);
  }
  return sum;
}

double score_gap(double theta, std::span<const ResponseItem> items) {
  require_items(items, "score_gap");
  // Per-item residual r - sigma(theta - b), written so that a correct item
  // contributes sigma(b - theta) rather than 1 - sigma(theta - b).
  double sum = 0.0;
  for (const auto& item : items) {
    sum += item.correct ? success_probability(item.b, theta)
                        : -success_probability(theta, item.b);
  }
  return sum;
}

SearchInterval search_interval(std::span<const ResponseItem> items, double margin) {
  require_items(items, "search_interval");
  const auto [lo, hi] = std::minmax_element(
      items.begin(), items.end(),
      [](const ResponseItem& a, const ResponseItem& b) { return a.b < b.b; });
  return {lo->b - margin, hi->b + margin};
}

AbilityEstimate estimate_ability(std::span<const ResponseItem> items,
                                 const BisectionOptions& options) {
  require_items(items, "estimate_ability");
  require_finite(items, "estimate_ability");
  const SearchInterval interval = search_interval(items, options.margin);
  double lower = interval.lower;
  double upper = interval.upper;

  AbilityEstimate est;
  const double gap_upper = score_gap(upper, items);
  if (gap_upper >= 0.0) {
    // Likelihood still rising at the upper end: all-correct pattern.
    est.theta = upper;
    est.clamped = true;
    est.count_gap = std::abs(gap_upper);
    return est;
  }
  const double gap_lower = score_gap(lower, items);
  if (gap_lower <= 0.0) {
    est.theta = lower;
    est.clamped = true;
    est.count_gap = std::abs(gap_lower);
    return est;
  }

  double previous = std::numeric_limits<double>::quiet_NaN();
  double middle = lower;
  double gap = gap_lower;
  for (int it = 1; it <= options.max_iterations; ++it) {
    middle = lower + 0.5 * (upper - lower);
    gap = score_gap(middle, items);
    est.iterations = it;
    if (gap == 0.0) break;
    const bool step_small = std::abs(middle - previous) < options.step_tolerance;
    const bool counts_match = std::abs(gap) <= options.count_tolerance;
    const bool stop = options.stop_rule == StopRule::kStepAndCount
                          ? (step_small && counts_match)
                          : (step_small || counts_match);
    if (stop) break;
    if (gap > 0.0) {
      lower = middle;
    } else {
      upper = middle;
    }
    previous = middle;
  }
  est.theta = middle;
  est.count_gap = std::abs(gap);
  return est;
}

AbilityEstimate estimate_ability_grid(std::span<const ResponseItem> items,
                                      double step, double margin) {
  require_items(items, "estimate_ability_grid");
  require_finite(items, "estimate_ability_grid");
  require_step(step);
  const SearchInterval interval = search_interval(items, margin);
  const Grid grid(interval, step);

  std::int64_t correct = 0;
  for (const auto& item : items) correct += item.correct ? 1 : 0;
  const auto n = static_cast<std::int64_t>(items.size());
  const double lipschitz = static_cast<double>(std::max(correct, n - correct));

  std::int64_t evaluations = 0;
  auto value_at = [&](std::int64_t j) {
    ++evaluations;
    return log_likelihood(grid.at(j), items);
  };

  std::int64_t best_index = 0;
  const double first_value = value_at(0);
  double best = first_value;
  auto offer = [&](std::int64_t j, double v) {
    if (v > best || (v == best && j < best_index)) {
      best = v;
      best_index = j;
    }
  };

  struct Segment {
    std::int64_t first;
    std::int64_t last;
    double first_value;
    double last_value;
    double bound;
  };
  auto make_segment = [&](std::int64_t a, std::int64_t b, double va, double vb) {
    const double width = grid.at(b) - grid.at(a);
    return Segment{a, b, va, vb, 0.5 * (va + vb + lipschitz * width)};
  };
  auto by_bound = [](const Segment& x, const Segment& y) {
    return x.bound < y.bound;
  };
  std::priority_queue<Segment, std::vector<Segment>, decltype(by_bound)>
      open(by_bound);

  const std::int64_t last = grid.size() - 1;
  if (last > 0) {
    const double v_last = value_at(last);
    offer(last, v_last);
    open.push(make_segment(0, last, first_value, v_last));
  }
  while (!open.empty()) {
    const Segment seg = open.top();
    // Slack absorbs rounding in the likelihood sums.
    const double slack = 1e-9 * (1.0 + std::abs(best));
    if (seg.bound < best - slack) break;
    open.pop();
    if (seg.last - seg.first <= 1) continue;
    const std::int64_t mid = seg.first + (seg.last - seg.first) / 2;
    const double v_mid = value_at(mid);
    offer(mid, v_mid);
    open.push(make_segment(seg.first, mid, seg.first_value, v_mid));
    open.push(make_segment(mid, seg.last, v_mid, seg.last_value));
  }
  return grid_result(items, interval, grid.at(best_index), evaluations);
}

AbilityEstimate estimate_ability_grid_exhaustive(std::span<const ResponseItem> items,
                                                 double step, double margin) {
  require_items(items, "estimate_ability_grid_exhaustive");
  require_finite(items, "estimate_ability_grid_exhaustive");
  require_step(step);
  const SearchInterval interval = search_interval(items, margin);
  const Grid grid(interval, step);
  std::int64_t best_index = 0;
  double best = log_likelihood(grid.at(0), items);
  for (std::int64_t j = 1; j < grid.size(); ++j) {
    const double v = log_likelihood(grid.at(j), items);
    if (v > best) {
      best = v;
      best_index = j;
    }
  }
  return grid_result(items, interval, grid.at(best_index), grid.size());
}

}  // namespace zpd
