#pragma once

// Independent reference implementations used only by the tests. Everything
// here is derived from first principles with its own numerics, so agreement
// with the library is evidence, not tautology.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

namespace oracle {

inline double rel_err(double got, double want) {
    const double scale = std::abs(want);
    return scale > 0.0 ? std::abs(got - want) / scale : std::abs(got);
}

/* ---- mutual Coulomb integral of two homogeneous balls -------------------
 *
 * C = int_a int_b rho_a(x) rho_b(y) / |x - y|  (unit masses unless scaled)
 *
 * Route: the unit ball b of radius Rb has exterior/interior potential shape
 * phi(w); averaging phi over the sphere |x - c_a| = r reduces the inner
 * integral to a 1D weight, and the remaining radial integral over ball a is
 * done by adaptive Simpson split at the curve's breakpoints. No shared code
 * with the library's piecewise closed forms.
 */

inline double ball_phi(double w, double Rb) {
    return w >= Rb ? 1.0 / w : (3.0 * Rb * Rb - w * w) / (2.0 * Rb * Rb * Rb);
}

// int w * phi(w) dw over [a, b], exact piecewise primitive
inline double ball_wphi_integral(double a, double b, double Rb) {
    auto inner = [Rb](double w) {  // primitive of w*phi inside the ball
        const double w2 = w * w;
        return (6.0 * Rb * Rb * w2 - w2 * w2) / (8.0 * Rb * Rb * Rb);
    };
    if (b <= Rb) return inner(b) - inner(a);
    if (a >= Rb) return b - a;
    return (inner(Rb) - inner(a)) + (b - Rb);
}

// spherical mean of phi over the shell of radius r centered s away
inline double ball_phi_shell_mean(double r, double s, double Rb) {
    if (s == 0.0) return ball_phi(r, Rb);
    if (r == 0.0) return ball_phi(s, Rb);
    return ball_wphi_integral(std::abs(s - r), s + r, Rb) / (2.0 * s * r);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double fa, double fm, double fb, double whole, double tol,
                               int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    if (!(b > a)) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 40);
}

inline double two_ball_coulomb(double ma, double Ra, double mb, double Rb, double s) {
    auto integrand = [&](double r) { return r * r * ball_phi_shell_mean(r, s, Rb); };

    // breakpoints of the piecewise-polynomial integrand
    std::vector<double> cuts{0.0, Ra};
    for (double c : {s - Rb, s + Rb, Rb - s, s})
        if (c > 0.0 && c < Ra) cuts.push_back(c);
    std::sort(cuts.begin(), cuts.end());

    double acc = 0.0;
    for (std::size_t q = 0; q + 1 < cuts.size(); ++q)
        acc += integrate(integrand, cuts[q], cuts[q + 1], 1e-15);
    return ma * mb * (3.0 / (Ra * Ra * Ra)) * acc;
}

/* ---- exhaustive path sum over decay orders -------------------------------
 *
 * Mirror of the cascade semantics: every ordered pair of live bundles on an
 * area races with rate W_nu E_{kappa nu} / hbar, the earliest firing keeps
 * nu's surviving members and renormalizes the intensities. Enumerating all
 * event sequences gives the exact final-state distribution.
 */

struct PathSumArea {
    std::vector<std::vector<int>> bundles;  // member state lists
    std::vector<double> pair_energy;        // row-major nb x nb
};

struct PathSumProblem {
    std::vector<double> intensities;
    std::vector<PathSumArea> areas;
    double hbar = 1.0;
};

namespace detail {

inline void path_sum_recurse(const PathSumProblem& pr, const std::vector<char>& alive,
                             const std::vector<double>& p, double weight,
                             std::vector<double>& out) {
    int n_alive = 0, last = -1;
    for (std::size_t s = 0; s < alive.size(); ++s)
        if (alive[s]) {
            ++n_alive;
            last = static_cast<int>(s);
        }
    if (n_alive == 1) {
        out[static_cast<std::size_t>(last)] += weight;
        return;
    }

    struct Event {
        double rate;
        const std::vector<int>* keep;
    };
    std::vector<Event> events;
    for (const PathSumArea& area : pr.areas) {
        const std::size_t nb = area.bundles.size();
        std::vector<int> live;
        std::vector<double> w;
        for (std::size_t b = 0; b < nb; ++b) {
            double acc = 0.0;
            bool any = false;
            for (int s : area.bundles[b])
                if (alive[static_cast<std::size_t>(s)]) {
                    any = true;
                    acc += p[static_cast<std::size_t>(s)];
                }
            if (any) {
                live.push_back(static_cast<int>(b));
                w.push_back(acc);
            }
        }
        if (live.size() < 2) continue;
        for (std::size_t x = 0; x < live.size(); ++x)
            for (std::size_t y = 0; y < live.size(); ++y) {
                if (x == y) continue;
                const double rate =
                    w[y] *
                    area.pair_energy[static_cast<std::size_t>(live[x]) * nb +
                                     static_cast<std::size_t>(live[y])] /
                    pr.hbar;
                if (rate > 0.0)
                    events.push_back({rate, &area.bundles[static_cast<std::size_t>(live[y])]});
            }
    }

    double total = 0.0;
    for (const Event& e : events) total += e.rate;
    if (!(total > 0.0)) return;  // stalled branch carries no probability mass

    for (const Event& e : events) {
        std::vector<char> next(alive.size(), 0);
        for (int s : *e.keep) next[static_cast<std::size_t>(s)] = alive[static_cast<std::size_t>(s)];
        double norm = 0.0;
        for (std::size_t s = 0; s < next.size(); ++s)
            if (next[s]) norm += p[s];
        std::vector<double> pn(p.size(), 0.0);
        for (std::size_t s = 0; s < next.size(); ++s)
            if (next[s]) pn[s] = p[s] / norm;
        path_sum_recurse(pr, next, pn, weight * e.rate / total, out);
    }
}

}  // namespace detail

inline std::vector<double> path_sum_final_probabilities(const PathSumProblem& pr) {
    std::vector<double> out(pr.intensities.size(), 0.0);
    std::vector<char> alive(pr.intensities.size(), 1);
    detail::path_sum_recurse(pr, alive, pr.intensities, 1.0, out);
    return out;
}

/* ---- closed-form off-diagonal evolution --------------------------------- */

inline std::complex<double> offdiag_closed_form(std::complex<double> rho0, double e1, double e2,
                                                double e_g12, double hbar, double t) {
    const std::complex<double> lambda(-e_g12 / hbar, -(e1 - e2) / hbar);
    return rho0 * std::exp(lambda * t);
}

}  // namespace oracle
