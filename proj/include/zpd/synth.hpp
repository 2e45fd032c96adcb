#pragma once

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "zpd/records.hpp"

namespace zpd {

struct UniformDifficulty {
  double low = -3.0;
  double high = 3.0;  // low == high gives a point mass
};

struct NormalDifficulty {
  double mean = 0.0;
  double sd = 1.0;
};

// Two-component normal mixture; `weight` is the probability of the first.
struct BimodalDifficulty {
  double mean1 = -1.5;
  double sd1 = 0.5;
  double mean2 = 1.5;
  double sd2 = 0.5;
  double weight = 0.5;
};

using DifficultyDistribution =
    std::variant<UniformDifficulty, NormalDifficulty, BimodalDifficulty>;

// "uniform:a,b", "normal:m,s" or "bimodal:m1,s1,m2,s2,w". Throws ConfigError.
DifficultyDistribution parse_difficulty_distribution(std::string_view text);
std::string to_string(const DifficultyDistribution& dist);

struct SynthSpec {
  std::size_t n_items = 1000;
  double theta_star = 0.0;
  DifficultyDistribution difficulty = UniformDifficulty{};
  double nll_noise_sd = 0.1;
  std::uint64_t seed = 0;
};

// Throws ConfigError on n_items == 0, sd <= 0, weight outside [0, 1],
// low > high or non-finite parameters.
void validate(const SynthSpec& spec);

// Counter-based generator: every draw is a pure function of
// (seed, item, stream), so items can be produced in any order.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t bits(std::uint64_t item, std::uint64_t stream) const;
  // Uniform on (0, 1); never returns 0 or 1.
  double uniform(std::uint64_t item, std::uint64_t stream) const;
  // Standard normal from two uniform streams (Box-Muller).
  double normal(std::uint64_t item, std::uint64_t stream_a, std::uint64_t stream_b) const;

 private:
  std::uint64_t seed_;
};

struct Population {
  double theta_star = 0.0;
  std::vector<double> true_difficulty;  // b*, by item index
  RecordSet records;
};

// Draws b* from the difficulty distribution, r ~ Bernoulli(sigma(theta* - b*)),
// and raw_nll = b* + noise shifted so the smallest value is 0.
Population generate_population(const SynthSpec& spec);

// Fraction of records with correct = 1. Throws std::invalid_argument when
// empty.
double empirical_accuracy(const RecordSet& records);

// Sidecar ground truth, one {"id","b_star","theta_star"} object per line.
void write_truth(const Population& population, std::ostream& output);

}  // namespace zpd
