#include "zpd/selection_file.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <unordered_set>

#include "json.hpp"
#include "zpd/error.hpp"

namespace zpd {

std::string format_significant(double value, int digits) {
  if (!std::isfinite(value)) throw std::invalid_argument("cannot format non-finite value");
  if (value == 0.0) return "0";
  char buffer[64];
  const int n = std::snprintf(buffer, sizeof buffer, "%.*g", digits, value);
  return std::string(buffer, static_cast<std::size_t>(n));
}

void write_selection(const Selection& selection, std::ostream& output) {
  const auto& samples = selection.samples;
  if (samples.empty()) throw std::invalid_argument("write_selection: empty selection");
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].rank != i + 1) {
      throw std::invalid_argument("write_selection: samples are not ranked 1..N in order");
    }
  }
  std::string line;
  for (const auto& s : samples) {
    line.clear();
    line += "{\"id\":";
    line += nlohmann::json(s.id).dump();
    line += ",\"b\":";
    line += format_significant(s.b);
    line += ",\"p\":";
    line += format_significant(s.p);
    line += ",\"zpd_score\":";
    line += format_significant(s.zpd_score);
    line += ",\"rank\":";
    line += std::to_string(s.rank);
    line += ",\"selected\":";
    line += s.selected ? "true" : "false";
    line += "}\n";
    output << line;
  }
  output.flush();
  if (!output) throw std::runtime_error("write_selection: output stream failure");
}

std::vector<ScoredSample> parse_selection(std::istream& input) {
  std::vector<ScoredSample> samples;
  std::unordered_set<std::string> seen;
  std::string text;
  std::size_t line = 0;
  while (std::getline(input, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "selection line " + std::to_string(line) + ": ";
    try {
      const auto object = nlohmann::json::parse(text);
      ScoredSample s;
      s.id = object.at("id").get<std::string>();
      s.b = object.at("b").get<double>();
      s.p = object.at("p").get<double>();
      s.zpd_score = object.at("zpd_score").get<double>();
      s.rank = object.at("rank").get<std::size_t>();
      s.selected = object.at("selected").get<bool>();
      if (!seen.insert(s.id).second) {
        throw ValidationError(where + "duplicate id '" + s.id + "'", {line}, "id");
      }
      samples.push_back(std::move(s));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(where + e.what(), {line});
    }
  }
  if (samples.empty()) throw ValidationError("selection file is empty");
  return samples;
}

}  // namespace zpd
