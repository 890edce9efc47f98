#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "renorm/specialfn.hpp"

using namespace renorm;
using Catch::Matchers::WithinRel;
using Catch::Matchers::WithinAbs;

namespace {

// K_0(x) = int_0^inf exp(-x cosh th) dth by a plain trapezoid rule; the integrand is
// analytic and decays doubly exponentially, so h = 1/64 is exact to rounding.
double k0_trapezoid(double x) {
    const double h = 1.0 / 64.0;
    double sum = 0.5 * std::exp(-x);
    for (int k = 1; k < 64 * 12; ++k) sum += std::exp(-x * std::cosh(k * h));
    return sum * h;
}

double k1_trapezoid(double x) {
    const double h = 1.0 / 64.0;
    double sum = 0.5 * std::exp(-x);
    for (int k = 1; k < 64 * 12; ++k) sum += std::exp(-x * std::cosh(k * h)) * std::cosh(k * h);
    return sum * h;
}

} // namespace

TEST_CASE("bessel_k closed forms and integral oracle", "[specialfn]") {
    CHECK_THAT(bessel_k(0.5, 2.0), WithinRel(std::sqrt(std::numbers::pi / 4.0) * std::exp(-2.0), 1e-14));
    CHECK_THAT(bessel_k(0.5, 2.0), WithinRel(0.1199377, 1e-6));

    const double k0_oracle = k0_trapezoid(1.0);
    CHECK_THAT(k0_oracle, WithinRel(0.42102443824070833, 1e-13));
    CHECK_THAT(bessel_k(0.0, 1.0), WithinRel(k0_oracle, 1e-12));

    for (double x : {1e-3, 0.1, 0.7, 2.5, 10.0, 40.0}) {
        CHECK_THAT(bessel_k(0.0, x), WithinRel(k0_trapezoid(x), 1e-12));
        CHECK_THAT(bessel_k(1.0, x), WithinRel(k1_trapezoid(x), 1e-12));
    }
    CHECK_THAT(1e-8 * bessel_k(1.0, 1e-8), WithinRel(1.0, 1e-12));
    CHECK(bessel_k(0.0, 800.0) == 0.0);
    CHECK_THROWS_AS(bessel_k(0.0, 0.0), domain_error);
    CHECK_THROWS_AS(bessel_k(0.0, -1.0), domain_error);
    CHECK_THROWS_AS(bessel_k(2.0, 1.0), domain_error);
}

TEST_CASE("K_1/2 normalisation identity", "[specialfn]") {
    for (double x = 0.1; x <= 100.0; x *= 1.37)
        CHECK_THAT(bessel_k(0.5, x) * std::sqrt(2.0 * x / std::numbers::pi) * std::exp(x), WithinRel(1.0, 1e-12));
}

TEST_CASE("Bessel product integrals against Gamma closed forms", "[specialfn]") {
    const double pi = std::numbers::pi;
    for (int dim : {2, 3}) {
        const double D = dim;
        const double nu = D / 2.0 - 1.0;
        for (double a : {0.5, 1.0, 3.0}) {
            auto radial = [&](auto g) {
                // int_0^inf g(r) dr written as a Laplace integral with decay 2a
                return laplace_integral([&](double r) { return g(r) * std::exp(2.0 * a * r); }, 2.0 * a);
            };
            const double i1 = radial([&](double r) { return std::pow(r, D + 1) * std::pow(bessel_k(1.0, a * r), 2); });
            const double c1 = std::sqrt(pi) * std::tgamma(1 + D / 2) * std::tgamma(2 + D / 2) * std::tgamma(D / 2) /
                              (4 * std::pow(a, D + 2) * std::tgamma((3 + D) / 2));
            CHECK_THAT(i1, WithinRel(c1, 1e-8));

            const double i2 = radial([&](double r) { return r * std::pow(bessel_k(nu, a * r), 2); });
            // sign-corrected form; D = 2 is the continuous limit 1/(2a^2)
            const double c2 = dim == 2 ? 1.0 / (2 * a * a) : -pi * (D - 2) / std::sin(pi * D / 2) / (4 * a * a);
            CHECK_THAT(i2, WithinRel(c2, 1e-8));

            const double i3 =
                radial([&](double r) { return std::pow(r, D / 2 + 1) * bessel_k(1.0, a * r) * bessel_k(nu, a * r); });
            const double c3 = std::pow(2.0, D / 2) * std::tgamma(D / 2) / ((D + 2) * std::pow(a, D / 2 + 2));
            CHECK_THAT(i3, WithinRel(c3, 1e-8));
        }
    }
}

TEST_CASE("sn curvature cases", "[specialfn]") {
    CHECK(sn(0.0, 3.7) == 3.7);
    CHECK_THAT(sn(1.0, std::numbers::pi / 2), WithinRel(1.0, 1e-15));
    CHECK_THAT(sn(-1.0, 1.0), WithinRel(1.17520119364380146, 1e-14));
    CHECK_THAT(sn(1e-9, 2.0), WithinRel(2.0 * (1 - 4e-9 / 6), 1e-15));
    for (double k : {-4.0, -1.0, 0.0, 0.3, 1.0, 4.0}) {
        const double r = 1e-4;
        // second-order Taylor agreement
        CHECK_THAT(sn(k, r) / r, WithinAbs(1.0 - k * r * r / 6.0, 1e-10));
    }
    CHECK_THROWS_AS(sn(1.0, 3.5), domain_error);
    CHECK_THROWS_AS(sn(0.0, -1.0), domain_error);
}

TEST_CASE("laplace_integral examples", "[specialfn]") {
    CHECK_THAT(laplace_integral([](double) { return 1.0; }, 1.0), WithinRel(1.0, 1e-12));
    // Frullani: (e^{-t} - e^{-4t})/t with the e^{-t} factor moved into the weight
    const double fr = laplace_integral([](double t) { return -std::expm1(-3.0 * t) / t; }, 1.0);
    CHECK_THAT(fr, WithinRel(std::log(4.0), 1e-10));
    CHECK_THAT(laplace_integral([](double t) { return 1.0 / std::sqrt(t); }, 1.0),
               WithinRel(std::sqrt(std::numbers::pi), 1e-10));
    // complex integrand: int e^{(-2+3i)t} dt = 1/(2-3i)
    const cplx z = laplace_integral([](double t) { return std::exp(cplx(0, 3.0) * t); }, 2.0);
    CHECK(std::abs(z - 1.0 / cplx(2.0, -3.0)) < 1e-11);
    // widely separated scales
    const double ms = laplace_integral([](double t) { return -std::expm1(-1e6 * t) / t; }, 0.0625);
    CHECK_THAT(ms, WithinRel(std::log((1e6 + 0.0625) / 0.0625), 1e-10));
    CHECK_THROWS_AS(laplace_integral([](double) { return 1.0; }, 0.0), domain_error);
}

TEST_CASE("QuadratureSpec validation", "[specialfn]") {
    QuadratureSpec q;
    q.node_count = 4;
    CHECK_THROWS_AS(q.validate(), domain_error);
    q = {};
    q.relative_tolerance = 1e-2;
    CHECK_THROWS_AS(q.validate(), domain_error);
    q = {};
    q.max_refinements = 1;
    // a kink cannot be resolved with a single bisection
    CHECK_THROWS_AS(integrate_adaptive([](double x) { return std::sqrt(std::abs(x - 0.3141)); }, 0.0, 1.0, q),
                    convergence_error);
}

TEST_CASE("double_integral_su", "[specialfn]") {
    const auto spec = QuadratureSpec::two_dimensional();
    const double one = double_integral_su([](double, double) { return 1.0; }, true, 1.0, spec);
    CHECK_THAT(one, WithinRel(std::sqrt(std::numbers::pi), 1e-10));

    auto f = [](double s) { return 1.0 / (1.0 + s * s); };
    auto g = [](double u) { return std::sqrt(u) + 1.0; };
    const double both = double_integral_su([&](double s, double u) { return f(s) * g(u); }, true, 2.0, spec);
    const double fs = integrate_adaptive([&](double s) { return std::exp(-0.25 * s * s) * f(s); }, 0.0,
                                         2.0 * std::sqrt(40.0), spec).value;
    const double gu = laplace_integral(g, 2.0, spec);
    CHECK_THAT(both, WithinRel(fs * gu, 1e-10));
}

TEST_CASE("quadrature is deterministic", "[specialfn]") {
    auto f = [](double t) { return std::cos(t) / std::sqrt(t + 0.1); };
    const double a = laplace_integral(f, 0.7);
    const double b = laplace_integral(f, 0.7);
    CHECK(a == b);
}
