#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "renorm/verification.hpp"

using namespace renorm;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double pi = std::numbers::pi;

ManifoldSpec torus2() { return ManifoldSpec::flat_torus({2.0 * pi, 2.0 * pi}, 0.5); }

bool passing(const BoundReport& r) { return r.verdict == Verdict::holds || r.verdict == Verdict::holds_with_calibration; }

} // namespace

TEST_CASE("log-log fit and verdict logic", "[verification]") {
    std::vector<double> x{1, 10, 100, 1000}, y;
    for (double v : x) y.push_back(3.0 * std::pow(v, -0.75));
    const auto f = fit_loglog(x, y);
    CHECK_THAT(f.slope, WithinAbs(-0.75, 1e-13));
    CHECK_THAT(std::exp(f.intercept), WithinRel(3.0, 1e-12));
    CHECK(f.error < 1e-12);
    CHECK_THROWS_AS(fit_loglog({1.0}, {1.0}), domain_error);

    BoundReport r;
    r.values = {{1.0, 0.1}, {2.0, 0.0}};
    r.bound = {{1.05, 0.0}, {2.0, 0.0}};
    r.bound_provenance = "exact";
    CHECK(bound_verdict(r) == Verdict::holds);
    r.bound_provenance = "calibrated";
    CHECK(bound_verdict(r) == Verdict::holds_with_calibration);
    r.values[1].value = 2.2;
    CHECK(bound_verdict(r) == Verdict::violated);
    r.values[1].tolerance = 0.3;
    CHECK(bound_verdict(r) != Verdict::violated);
    CHECK(to_string(Verdict::holds_with_calibration) == "holds_with_calibration");
}

TEST_CASE("pseudo-resolvent identity on the torus", "[verification]") {
    const auto m = torus2();
    auto basis = std::make_shared<const SpectralBasis>(spectral_basis(m, 49));
    const CenterSet c{{torus_point(m, {1.0, 2.0, 0.0}), torus_point(m, {3.5, 4.0, 0.0})}, {1.0, 0.7}};
    const FunctionCalculus fc(m, c);
    const auto battery = test_battery(basis, c, 42);
    REQUIRE(battery.size() == 4);
    const auto r = check_resolvent_identity(fc, -3.0, -7.0, battery);
    CHECK(r.verdict == Verdict::holds);
    for (const auto& v : r.values) CHECK(v.value < 1e-7);
    const auto same = check_resolvent_identity(fc, -3.0, -3.0, battery);
    for (const auto& v : same.values) CHECK(v.value == 0.0);
    const auto cx = check_resolvent_identity(fc, cplx(-3.0, 1.0), cplx(-5.0, -2.0), battery);
    CHECK(cx.verdict == Verdict::holds);
}

TEST_CASE("relativistic matrix and truncated identities", "[verification]") {
    const auto m = ManifoldSpec::flat_torus({2.0 * pi, 2.0 * pi}, 1.0);
    const RelativisticModel model(m, {torus_point(m, {1.0, 2.0, 0.0}), torus_point(m, {2.5, 3.0, 0.0})}, {0.5, 0.3}, 1.0);
    const auto r = check_relativistic_identity(model, {{-1.0, -4.0}, {cplx(-2.0, 1.0), -0.5}});
    CHECK(r.verdict == Verdict::holds);
    const auto t = check_relativistic_truncated_identity(model, spectral_basis(m, 49), cplx(-1.0, 0.5), -3.0, 3);
    CHECK(t.verdict == Verdict::holds);
}

TEST_CASE("strong limit: free part matches one-mode arithmetic", "[verification]") {
    const auto m = torus2();
    auto basis = std::make_shared<const SpectralBasis>(spectral_basis(m, 25));
    const CenterSet c{{torus_point(m, {1.0, 2.0, 0.0})}, {1.0}};
    const FunctionCalculus fc(m, c);
    CVector e = CVector::Zero(basis->size());
    e(3) = 1.0;
    const auto res = check_strong_limit(fc, SpectralFunction(basis, e), 2.0, 64, 4);
    const double kl = m.kappa() * basis->eigenvalue(3);
    for (std::size_t k = 0; k < res.free_part.size(); ++k) {
        const double a = res.report.grid[k] * 2.0;
        CHECK_THAT(res.free_part[k], WithinRel(kl / (kl + a), 1e-12));
    }
    CHECK(res.decreasing);
    for (std::size_t k = 1; k < res.interaction.size(); ++k) CHECK(res.interaction[k] < res.interaction[k - 1]);
}

TEST_CASE("symmetry checks for the three models", "[verification]") {
    const auto m = torus2();
    const CenterSet c{{torus_point(m, {1.0, 2.0, 0.0}), torus_point(m, {3.5, 4.0, 0.0})}, {1.0, 0.7}};
    const auto nr = check_symmetry(m, c, cplx(-5.0, 2.0), random_points(m, 4, 11));
    CHECK(nr.verdict == Verdict::holds);

    const auto mr = ManifoldSpec::flat_torus({2.0 * pi, 2.0 * pi}, 1.0);
    const RelativisticModel model(mr, {torus_point(mr, {1.0, 2.0, 0.0}), torus_point(mr, {2.5, 3.0, 0.0})}, {0.5, 0.5}, 1.0);
    CHECK(check_symmetry(model, spectral_basis(mr, 49), cplx(-5.0, 2.0)).verdict == Verdict::holds);

    const LeeModelSpec spec(m, torus_point(m, {1.0, 2.0, 0.0}), 0.5, 1.0, 0.5);
    const auto basis = spectral_basis(m, 9);
    const LeePrincipalOperator op(spec, basis, FockBasis(9, 2), 2);
    CHECK(check_symmetry(op, cplx(-1.0, 0.7)).verdict == Verdict::holds);
}

TEST_CASE("free-resolvent bound in three dimensions", "[verification]") {
    const std::vector<double> es{1, 10, 100, 1000};
    {
        const auto m = ManifoldSpec::flat_space(3, 0.5);
        ConstantsRegistry reg;
        reg.insert(m, calibrate_heat_bound(m));
        const Point a = flat_point(0, 0, 0);
        const auto r = check_free_resolvent_bound(m, reg, a, {flat_point(0.3, 0, 0), flat_point(1, 1, 0), flat_point(2, 1, 1)}, es);
        CHECK(r.verdict == Verdict::holds);
        REQUIRE(r.exponent_fit);
        CHECK_THAT(r.exponent_fit->slope, WithinAbs(0.5, 1e-6));
        // exact kernel equals the bound form for flat space
        CHECK_THAT(r.values[0].value, WithinRel(r.bound[0].value, 1e-9));
    }
    {
        const auto m = ManifoldSpec::flat_torus({4.0, 4.0, 4.0}, 0.5);
        ConstantsRegistry reg;
        reg.insert(m, calibrate_heat_bound(m));
        const Point a = torus_point(m, {0, 0, 0});
        const auto r = check_free_resolvent_bound(m, reg, a, {torus_point(m, {0.3, 0, 0}), torus_point(m, {1, 1, 0.5})}, es);
        CHECK(r.verdict == Verdict::holds_with_calibration);
    }
}

TEST_CASE("alpha and Phi inverse scaling shapes", "[verification]") {
    const std::vector<double> es{1e2, 3e2, 1e3, 3e3, 1e4};
    {
        const auto m = ManifoldSpec::hyperbolic(1.0, 0.5);
        const CenterSet c{{reference_point(m)}, {1.0}};
        const auto r = check_alpha_scaling(m, c, es);
        CHECK(passing(r));
        CHECK_THAT(r.exponent_fit->slope, WithinAbs(-1.0, 0.1));
    }
    {
        const auto m = ManifoldSpec::flat_space(3, 0.5);
        const CenterSet c{{flat_point(0, 0, 0)}, {1.0}};
        const auto r = check_alpha_scaling(m, c, es);
        CHECK(passing(r));
        CHECK_THAT(r.exponent_fit->slope, WithinAbs(-0.5, 1e-6));
        CHECK(passing(check_phi_inverse_scaling(m, c, es)));
    }
    {
        const auto m = torus2();
        const CenterSet c{{torus_point(m, {1.0, 2.0, 0.0}), torus_point(m, {3.5, 4.0, 0.0})}, {1.0, 0.7}};
        CHECK(passing(check_alpha_scaling(m, c, es)));
        CHECK(passing(check_phi_inverse_scaling(m, c, es)));
    }
}

TEST_CASE("heat-kernel and comparison-geometry reports", "[verification]") {
    for (const auto& m : {torus2(), ManifoldSpec::sphere(1.0, 0.5), ManifoldSpec::hyperbolic(1.0, 0.5)}) {
        ConstantsRegistry reg;
        reg.insert(m, calibrate_heat_bound(m));
        CHECK(passing(check_heat_bounds(m, reg, 6, 6)));
    }
    CHECK(check_jacobian_bounds(ManifoldSpec::sphere(1.0, 0.5)).verdict == Verdict::holds);
    CHECK(check_jacobian_bounds(ManifoldSpec::hyperbolic(2.0, 0.5)).verdict == Verdict::holds);
}

TEST_CASE("relativistic shape reports", "[verification]") {
    const auto m = ManifoldSpec::flat_torus({2.0 * pi, 2.0 * pi}, 1.0);
    const RelativisticModel model(m, {torus_point(m, {1.0, 2.0, 0.0}), torus_point(m, {2.5, 3.0, 0.0})}, {0.5, 0.5}, 1.0);
    CHECK(passing(check_relativistic_phi_inverse(model, {1e1, 1e2, 1e3, 1e4})));
    const auto d = check_decay(model, 0, {1e2, 1e3, 1e4});
    CHECK(passing(d));
    CHECK(passing(check_subordination(1.0, {0.5, 1.0, 3.0}, {0.0, 1.0, 2.25})));
}
