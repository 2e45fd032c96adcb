#include "zpd/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "zpd/error.hpp"
#include "zpd/rasch.hpp"

namespace zpd {
namespace {

constexpr std::uint64_t kStreamDifficultyA = 0;
constexpr std::uint64_t kStreamDifficultyB = 1;
constexpr std::uint64_t kStreamComponent = 2;
constexpr std::uint64_t kStreamResponse = 3;
constexpr std::uint64_t kStreamNoiseA = 4;
constexpr std::uint64_t kStreamNoiseB = 5;
constexpr std::uint64_t kStreamTokens = 6;

std::uint64_t mix64(std::uint64_t z) {
  // splitmix64 finalizer
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<double> parse_numbers(std::string_view text) {
  std::vector<double> values;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const auto end = comma == std::string_view::npos ? text.size() : comma;
    std::string field(text.substr(start, end - start));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(field, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != field.size()) {
      throw ConfigError("bad number '" + field + "' in difficulty distribution");
    }
    values.push_back(v);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return values;
}

double draw_difficulty(const DifficultyDistribution& dist, const CounterRng& rng,
                       std::uint64_t item) {
  return std::visit(
      [&](const auto& d) -> double {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, UniformDifficulty>) {
          return d.low + (d.high - d.low) * rng.uniform(item, kStreamDifficultyA);
        } else if constexpr (std::is_same_v<T, NormalDifficulty>) {
          return d.mean + d.sd * rng.normal(item, kStreamDifficultyA, kStreamDifficultyB);
        } else {
          const double z = rng.normal(item, kStreamDifficultyA, kStreamDifficultyB);
          if (rng.uniform(item, kStreamComponent) < d.weight) return d.mean1 + d.sd1 * z;
          return d.mean2 + d.sd2 * z;
        }
      },
      dist);
}

std::string item_id(std::size_t i, std::size_t n) {
  const std::string digits = std::to_string(i + 1);
  const std::size_t width = std::max<std::size_t>(6, std::to_string(n).size());
  return "syn-" + std::string(width - digits.size(), '0') + digits;
}

}  // namespace

DifficultyDistribution parse_difficulty_distribution(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw ConfigError("difficulty distribution must look like name:params, got '" +
                      std::string(text) + "'");
  }
  const auto name = text.substr(0, colon);
  const auto params = parse_numbers(text.substr(colon + 1));
  auto expect = [&](std::size_t n) {
    if (params.size() != n) {
      throw ConfigError(std::string(name) + " distribution takes " + std::to_string(n) +
                        " parameters");
    }
  };
  DifficultyDistribution dist;
  if (name == "uniform") {
    expect(2);
    dist = UniformDifficulty{params[0], params[1]};
  } else if (name == "normal") {
    expect(2);
    dist = NormalDifficulty{params[0], params[1]};
  } else if (name == "bimodal") {
    expect(5);
    dist = BimodalDifficulty{params[0], params[1], params[2], params[3], params[4]};
  } else {
    throw ConfigError("unknown difficulty distribution '" + std::string(name) + "'");
  }
  return dist;
}

std::string to_string(const DifficultyDistribution& dist) {
  std::ostringstream out;
  out.precision(17);
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, UniformDifficulty>) {
          out << "uniform:" << d.low << ',' << d.high;
        } else if constexpr (std::is_same_v<T, NormalDifficulty>) {
          out << "normal:" << d.mean << ',' << d.sd;
        } else {
          out << "bimodal:" << d.mean1 << ',' << d.sd1 << ',' << d.mean2 << ',' << d.sd2
              << ',' << d.weight;
        }
      },
      dist);
  return out.str();
}

void validate(const SynthSpec& spec) {
  if (spec.n_items < 1) throw ConfigError("n_items must be >= 1");
  if (!std::isfinite(spec.theta_star)) throw ConfigError("theta_star must be finite");
  if (!std::isfinite(spec.nll_noise_sd) || spec.nll_noise_sd < 0.0) {
    throw ConfigError("nll_noise_sd must be finite and >= 0");
  }
  std::visit(
      [](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, UniformDifficulty>) {
          if (!std::isfinite(d.low) || !std::isfinite(d.high) || d.low > d.high) {
            throw ConfigError("uniform difficulty needs finite low <= high");
          }
        } else if constexpr (std::is_same_v<T, NormalDifficulty>) {
          if (!std::isfinite(d.mean) || !std::isfinite(d.sd) || !(d.sd > 0.0)) {
            throw ConfigError("normal difficulty needs a finite mean and sd > 0");
          }
        } else {
          if (!std::isfinite(d.mean1) || !std::isfinite(d.mean2) || !(d.sd1 > 0.0) ||
              !(d.sd2 > 0.0) || !std::isfinite(d.sd1) || !std::isfinite(d.sd2)) {
            throw ConfigError("bimodal difficulty needs finite means and sds > 0");
          }
          if (!(d.weight >= 0.0 && d.weight <= 1.0)) {
            throw ConfigError("bimodal weight must lie in [0, 1]");
          }
        }
      },
      spec.difficulty);
}

std::uint64_t CounterRng::bits(std::uint64_t item, std::uint64_t stream) const {
  return mix64(mix64(seed_ ^ 0x9e3779b97f4a7c15ULL) + mix64(item * 8 + stream + 1));
}

double CounterRng::uniform(std::uint64_t item, std::uint64_t stream) const {
  // 53 random bits, offset by half a step to stay inside (0, 1).
  return (static_cast<double>(bits(item, stream) >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t item, std::uint64_t stream_a,
                          std::uint64_t stream_b) const {
  const double u1 = uniform(item, stream_a);
  const double u2 = uniform(item, stream_b);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Population generate_population(const SynthSpec& spec) {
  validate(spec);
  const CounterRng rng(spec.seed);
  const std::size_t n = spec.n_items;

  std::vector<double> b_star(n);
  std::vector<double> pseudo_nll(n);
  for (std::size_t i = 0; i < n; ++i) {
    b_star[i] = draw_difficulty(spec.difficulty, rng, i);
    const double noise =
        spec.nll_noise_sd == 0.0
            ? 0.0
            : spec.nll_noise_sd * rng.normal(i, kStreamNoiseA, kStreamNoiseB);
    pseudo_nll[i] = b_star[i] + noise;
  }
  const double shift = -*std::min_element(pseudo_nll.begin(), pseudo_nll.end());

  std::vector<SampleRecord> records(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& r = records[i];
    r.id = item_id(i, n);
    r.raw_nll = std::max(0.0, pseudo_nll[i] + shift);
    r.token_count = 16 + static_cast<std::size_t>(rng.bits(i, kStreamTokens) % 497);
    r.correct = rng.uniform(i, kStreamResponse) <
                success_probability(spec.theta_star, b_star[i]);
  }
  return Population{spec.theta_star, std::move(b_star),
                    RecordSet::from_records(std::move(records), "synthetic")};
}

double empirical_accuracy(const RecordSet& records) {
  if (records.size() == 0) throw std::invalid_argument("empirical_accuracy: empty record set");
  std::size_t correct = 0;
  for (const auto& r : records) correct += r.correct ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(records.size());
}

void write_truth(const Population& population, std::ostream& output) {
  for (std::size_t i = 0; i < population.true_difficulty.size(); ++i) {
    nlohmann::ordered_json line = {{"id", population.records[i].id},
                                   {"b_star", population.true_difficulty[i]},
                                   {"theta_star", population.theta_star}};
    output << line.dump() << '\n';
  }
  if (!output) throw std::runtime_error("failed writing truth file");
}

}  // namespace zpd
