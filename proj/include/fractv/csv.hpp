#pragma once

#include <string>
#include <vector>

#include "fractv/bilevel.hpp"

namespace fractv {

/// %.17g, with "inf" for infinity.
std::string format_number(double v);

/// Columns alpha0..alphaK, r1, r2, p0..pK, assessment, converged, iterations; one row per
/// record in the given order.
std::string records_csv(const std::vector<AssessmentRecord>& records);

/// Plain matrix of samples, one image row per line.
std::string matrix_csv(const Image& image);

void write_text(const std::string& path, const std::string& text);

}  // namespace fractv
