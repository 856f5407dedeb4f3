#pragma once

#include <cstddef>
#include <vector>

namespace dpc {

// Upper regularized incomplete gamma Q(a, x) = Gamma(a, x) / Gamma(a).
// a > 0, x >= 0. Series expansion for x < a + 1, continued fraction otherwise.
double regularized_gamma_q(double a, double x);

// Survival function of the chi-square distribution with dof degrees of
// freedom. dof == 0 returns 1 (degenerate distribution at zero).
double chi_square_p_value(double chi2, int dof);

// Least-squares slope of y against x. Needs at least two distinct x values.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace dpc
