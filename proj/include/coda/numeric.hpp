#pragma once

#include <span>

namespace coda {

// Correctly rounded sum of doubles (Shewchuk partials, as in Python's fsum).
double exact_sum(std::span<const double> values);

}  // namespace coda
