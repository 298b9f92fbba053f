#pragma once

#include <span>

namespace refinder {

/// Regularized incomplete beta I_x(a, b) by Lentz's continued fraction.
double regularized_incomplete_beta(double a, double b, double x);

/// Two-sided p-value of Student's t statistic with `dof` degrees of freedom.
double student_t_two_sided_p(double t, double dof);

struct TTestResult {
    double t = 0.0;  // +-infinity when the differences are constant and nonzero
    double p = 1.0;
};

/// Paired Student's t-test on a - b. Throws ParameterError for unequal
/// lengths or fewer than two pairs.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b);

}  // namespace refinder
