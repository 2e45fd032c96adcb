#include "zpd/selection.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "zpd/error.hpp"
#include "zpd/rasch.hpp"

namespace zpd {
namespace {

void check_rho(double rho) {
  if (!(rho > 0.0 && rho <= 1.0)) {
    throw ConfigError("budget ratio must lie in (0, 1], got " + std::to_string(rho));
  }
}

}  // namespace

std::string_view to_string(SelectionMode mode) {
  switch (mode) {
    case SelectionMode::kEasy: return "easy";
    case SelectionMode::kZpd: return "zpd";
    case SelectionMode::kHard: return "hard";
  }
  return "zpd";
}

SelectionMode parse_selection_mode(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "easy") return SelectionMode::kEasy;
  if (lower == "zpd") return SelectionMode::kZpd;
  if (lower == "hard") return SelectionMode::kHard;
  throw ConfigError("unknown selection mode '" + std::string(text) +
                    "' (expected easy, zpd or hard)");
}

std::vector<std::string> Selection::selected_ids() const {
  std::vector<std::string> ids;
  ids.reserve(k);
  for (const auto& s : samples) {
    if (s.selected) ids.push_back(s.id);
  }
  return ids;
}

double zpd_score(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw std::invalid_argument("zpd_score: probability outside [0, 1]");
  }
  return p * (1.0 - p);
}

std::size_t budget_size(double rho, std::size_t n) {
  check_rho(rho);
  const double exact = rho * static_cast<double>(n);
  const double k = std::ceil(exact - 1e-12 * exact);
  return std::clamp<std::size_t>(static_cast<std::size_t>(k), 1, n);
}

Selection partition_count(std::span<const CalibratedItem> items, double theta,
                          std::size_t k, double rho, SelectionMode mode) {
  if (items.empty()) throw std::invalid_argument("selection: empty item list");
  check_rho(rho);
  if (!std::isfinite(theta)) throw std::invalid_argument("selection: non-finite theta");
  if (k < 1 || k > items.size()) {
    throw std::invalid_argument("selection: count must lie in [1, N]");
  }

  std::vector<ScoredSample> scored;
  scored.reserve(items.size());
  for (const auto& item : items) {
    ScoredSample s;
    s.id = item.id;
    s.b = item.b;
    s.p = success_probability(theta, item.b);
    s.zpd_score = zpd_score(s.p);
    scored.push_back(std::move(s));
  }

  std::vector<std::size_t> order(scored.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  switch (mode) {
    case SelectionMode::kZpd:
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scored[a].zpd_score > scored[b].zpd_score;
      });
      break;
    case SelectionMode::kEasy:
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scored[a].b < scored[b].b;
      });
      break;
    case SelectionMode::kHard:
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scored[a].b > scored[b].b;
      });
      break;
  }

  Selection selection;
  selection.theta = theta;
  selection.rho = rho;
  selection.mode = mode;
  selection.k = k;
  selection.samples.reserve(scored.size());
  for (std::size_t r = 0; r < order.size(); ++r) {
    ScoredSample s = std::move(scored[order[r]]);
    s.rank = r + 1;
    s.selected = r < k;
    selection.samples.push_back(std::move(s));
  }
  return selection;
}

Selection partition(std::span<const CalibratedItem> items, double theta, double rho,
                    SelectionMode mode) {
  if (items.empty()) throw std::invalid_argument("selection: empty item list");
  return partition_count(items, theta, budget_size(rho, items.size()), rho, mode);
}

Selection rank_and_select_count(std::span<const CalibratedItem> items, double theta,
                                std::size_t k, double rho) {
  return partition_count(items, theta, k, rho, SelectionMode::kZpd);
}

Selection rank_and_select(std::span<const CalibratedItem> items, double theta,
                          double rho) {
  return partition(items, theta, rho, SelectionMode::kZpd);
}

}  // namespace zpd
