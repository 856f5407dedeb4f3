#include "sphere_interaction.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "error.hpp"

namespace dpc {

namespace {

// 8-point Gauss-Legendre on [-1, 1], exact through degree 15. The overlap
// integrand below is polynomial of degree 5 on each smooth piece.
constexpr int kGL = 8;
constexpr double kGLx[kGL] = {
    -0.96028985649753623, -0.79666647741362674, -0.52553240991632899, -0.18343464249564980,
    0.18343464249564980, 0.52553240991632899, 0.79666647741362674, 0.96028985649753623};
constexpr double kGLw[kGL] = {
    0.10122853629037626, 0.22238103445337447, 0.31370664587788729, 0.36268378337836198,
    0.36268378337836198, 0.31370664587788729, 0.22238103445337447, 0.10122853629037626};

}  // namespace

double sphere_self_coulomb(double m, double R) {
    if (!(R > 0.0)) fail_config("sphere self-interaction: radius must be > 0");
    return 1.2 * m * m / R;
}

double sphere_pair_coulomb(double ma, double Ra, double mb, double Rb, double s) {
    if (!(Ra > 0.0) || !(Rb > 0.0)) fail_config("sphere pair: radii must be > 0");
    if (!(s >= 0.0) || !std::isfinite(s)) fail_config("sphere pair: separation must be finite and >= 0");
    if (ma == 0.0 || mb == 0.0) return 0.0;

    if (Ra > Rb) {
        std::swap(ma, mb);
        std::swap(Ra, Rb);
    }

    if (s >= Ra + Rb) return ma * mb / s;

    // ball a entirely inside ball b: <3Rb^2 - r^2> over ball a displaced by s
    if (s <= Rb - Ra)
        return ma * mb * (3.0 * Rb * Rb - s * s - 0.6 * Ra * Ra) / (2.0 * Rb * Rb * Rb);

    // Partial overlap. Shell-average the potential shape of ball b over the
    // radial shells of ball a:
    //   C = (3/2) ma mb / (s Ra^3) * integral_0^Ra r * I(|s-r|, s+r) dr,
    //   I(p, q) = integral_p^q t * phi_b(t) dt,
    //   phi_b(t) = (3Rb^2 - t^2)/(2Rb^3) inside, 1/t outside.
    const double Rb3 = Rb * Rb * Rb;
    auto inner_anti = [Rb, Rb3](double t) {
        const double t2 = t * t;
        return (6.0 * Rb * Rb * t2 - t2 * t2) / (8.0 * Rb3);
    };
    auto shell_I = [&](double p, double q) {
        double acc = 0.0;
        const double pi = std::min(p, Rb), qi = std::min(q, Rb);
        if (qi > pi) acc += inner_anti(qi) - inner_anti(pi);
        const double po = std::max(p, Rb), qo = std::max(q, Rb);
        if (qo > po) acc += qo - po;
        return acc;
    };
    auto integrand = [&](double r) { return r * shell_I(std::abs(s - r), s + r); };

    // the integrand is smooth except where a shell touches the surface of b
    const double split = std::abs(s - Rb);
    double edges[3] = {0.0, std::clamp(split, 0.0, Ra), Ra};
    double total = 0.0;
    for (int seg = 0; seg < 2; ++seg) {
        const double lo = edges[seg], hi = edges[seg + 1];
        if (!(hi > lo)) continue;
        const double c = 0.5 * (lo + hi), hw = 0.5 * (hi - lo);
        double acc = 0.0;
        for (int q = 0; q < kGL; ++q) acc += kGLw[q] * integrand(c + hw * kGLx[q]);
        total += acc * hw;
    }
    return 1.5 * ma * mb / (s * Ra * Ra * Ra) * total;
}

}  // namespace dpc
