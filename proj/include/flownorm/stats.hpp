#pragma once

#include <span>

namespace flownorm::stats {

// Smallest two-sided p-value ever reported; anything smaller is floored and
// flagged so downstream tables can state "< floor" instead of printing 0.
inline constexpr double kPValueFloor = 1e-300;

double mean(std::span<const double> x);          // DataError on empty
double sample_variance(std::span<const double> x);  // n-1 denominator; DataError if n < 2
double sample_std(std::span<const double> x);

// True when every element equals the first bitwise-comparable value. Used to
// detect exactly-degenerate (constant) inputs before variance-based code runs.
bool all_equal(std::span<const double> x);

// Regularized incomplete beta function I_x(a, b), continued-fraction
// evaluation. Exposed for the distribution tests.
double incomplete_beta(double a, double b, double x);

struct TwoSidedP {
  double p;          // floored at kPValueFloor
  bool below_floor;  // true when the exact value underflowed the floor
};

// Two-sided tail probability of Student's t with `df` degrees of freedom.
// df must be positive and t finite.
TwoSidedP student_t_two_sided_p(double t, double df);

}  // namespace flownorm::stats
