#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "zpd/difficulty.hpp"

namespace zpd {

enum class SelectionMode { kEasy, kZpd, kHard };

std::string_view to_string(SelectionMode mode);
// Accepts "easy", "zpd", "hard" (case-insensitive). Throws ConfigError.
SelectionMode parse_selection_mode(std::string_view text);

struct ScoredSample {
  std::string id;
  double b = 0.0;
  double p = 0.0;          // sigma(theta - b)
  double zpd_score = 0.0;  // p (1 - p)
  std::size_t rank = 0;    // 1-based
  bool selected = false;
};

struct Selection {
  double theta = 0.0;
  double rho = 1.0;
  SelectionMode mode = SelectionMode::kZpd;
  std::size_t k = 0;                  // number of selected samples
  std::vector<ScoredSample> samples;  // ordered by rank

  std::vector<std::string> selected_ids() const;
};

// p (1 - p). Throws std::invalid_argument when p is outside [0, 1].
double zpd_score(double p);

// ceil(rho * n), clamped to [1, n]. A relative tolerance of 1e-12 keeps
// products such as 0.07 * 100 from rounding up past the intended count.
std::size_t budget_size(double rho, std::size_t n);

// Scores every item at `theta`, ranks by descending ZPD score (stable on
// input order) and marks the first budget_size(rho, N) as selected.
Selection rank_and_select(std::span<const CalibratedItem> items, double theta,
                          double rho);

// Like rank_and_select, but with an explicit selection count k (1 <= k <= N).
// Used when the budget is computed against a larger pool than `items`.
Selection rank_and_select_count(std::span<const CalibratedItem> items, double theta,
                                std::size_t k, double rho);

// ZPD mode is rank_and_select. EASY ranks by ascending b, HARD by descending
// b; ties keep input order in every mode.
Selection partition(std::span<const CalibratedItem> items, double theta, double rho,
                    SelectionMode mode);

Selection partition_count(std::span<const CalibratedItem> items, double theta,
                          std::size_t k, double rho, SelectionMode mode);

}  // namespace zpd
