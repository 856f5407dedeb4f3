#include "stats.hpp"

#include <cmath>
#include <limits>

#include "error.hpp"

namespace dpc {

namespace {

// lower regularized gamma by series, valid for x < a + 1
double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int n = 0; n < 500; ++n) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// upper regularized gamma by modified Lentz continued fraction, x >= a + 1
double gamma_q_cf(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

}  // namespace

double regularized_gamma_q(double a, double x) {
    if (!(a > 0.0) || !(x >= 0.0) || !std::isfinite(a))
        fail_config("regularized_gamma_q: requires a > 0 and x >= 0");
    if (x == 0.0) return 1.0;
    if (!std::isfinite(x)) return 0.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_cf(a, x);
}

double chi_square_p_value(double chi2, int dof) {
    if (dof < 0 || !(chi2 >= 0.0))
        fail_config("chi_square_p_value: requires dof >= 0 and chi2 >= 0");
    if (dof == 0) return 1.0;
    return regularized_gamma_q(0.5 * dof, 0.5 * chi2);
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        fail_config("fit_slope: needs two or more paired samples");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) fail_config("fit_slope: all x values identical");
    return sxy / sxx;
}

}  // namespace dpc
