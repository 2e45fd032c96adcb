#pragma once

#include <istream>
#include <ostream>
#include <vector>

#include "zpd/selection.hpp"

namespace zpd {

// One line per sample in rank order:
//   {"id":"...","b":...,"p":...,"zpd_score":...,"rank":N,"selected":true|false}
// Floating-point fields carry 9 significant digits. Throws
// std::invalid_argument for an empty or incompletely ranked selection, and
// std::runtime_error when the stream fails.
void write_selection(const Selection& selection, std::ostream& output);

// Reads a selection file back. Throws ValidationError with line numbers.
std::vector<ScoredSample> parse_selection(std::istream& input);

// "%.9g" rendering used for every floating-point selection field.
std::string format_significant(double value, int digits = 9);

}  // namespace zpd
