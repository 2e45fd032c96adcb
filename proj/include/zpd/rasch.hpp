#pragma once

#include <span>

namespace zpd {

// One calibration response: item difficulty and whether the model got it right.
struct ResponseItem {
  double b = 0.0;  // logits
  bool correct = false;
};

struct AbilityEstimate {
  double theta = 0.0;  // logits
  int iterations = 0;
  // True when the response pattern has no finite MLE (all correct or all
  // incorrect) and theta sits on a search-interval endpoint.
  bool clamped = false;
  // |sum sigma(theta - b) - sum r| at termination.
  double count_gap = 0.0;
};

struct SearchInterval {
  double lower = 0.0;
  double upper = 0.0;
};

// How the two bisection stopping tests are combined.
enum class StopRule {
  // Stop only once the step is below tolerance and the expected/observed
  // correct counts agree to within count_tolerance.
  kStepAndCount,
  // Stop as soon as either test holds. Cheaper, but on small item sets the
  // count test alone can end the search far from the MLE.
  kStepOrCount,
};

struct BisectionOptions {
  double margin = 30.0;  // interval is [min b - margin, max b + margin]
  double step_tolerance = 1e-6;
  double count_tolerance = 1.0;
  int max_iterations = 200;
  StopRule stop_rule = StopRule::kStepAndCount;
};

// 1 / (1 + exp(-(theta - b))), evaluated without overflow for any finite gap.
double success_probability(double theta, double b);

// log sigma(x) and log(1 - sigma(x)) = log sigma(-x), stable for large |x|.
double log_sigmoid(double x);

// Sum over items of r log sigma(theta - b) + (1 - r) log(1 - sigma(theta - b)).
// Throws std::invalid_argument on an empty item list.
double log_likelihood(double theta, std::span<const ResponseItem> items);

// Derivative of log_likelihood in theta: sum r - sum sigma(theta - b).
// Strictly decreasing in theta.
double score_gap(double theta, std::span<const ResponseItem> items);

SearchInterval search_interval(std::span<const ResponseItem> items,
                               double margin = 30.0);

// Maximum-likelihood ability by bisection on score_gap over search_interval.
AbilityEstimate estimate_ability(std::span<const ResponseItem> items,
                                 const BisectionOptions& options = {});

// Reference estimator: the argmax of log_likelihood over the grid
// lower, lower + step, ..., plus the upper endpoint. Ties go to the smaller
// theta. Grid cells whose likelihood provably cannot reach the incumbent
// (|d log L / d theta| <= max(R, N - R)) are skipped, which leaves the
// result identical to scoring every grid point.
AbilityEstimate estimate_ability_grid(std::span<const ResponseItem> items,
                                      double step, double margin = 30.0);

// Same grid argmax, evaluating every grid point. Quadratic cost; used to
// check the pruned search on small problems.
AbilityEstimate estimate_ability_grid_exhaustive(std::span<const ResponseItem> items,
                                                 double step, double margin = 30.0);

}  // namespace zpd
