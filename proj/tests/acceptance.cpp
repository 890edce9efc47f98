// Acceptance suite: one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <memory>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "renorm/lee.hpp"
#include "renorm/manifold.hpp"
#include "renorm/pointinteraction.hpp"
#include "renorm/relativistic.hpp"
#include "renorm/verification.hpp"

using namespace renorm;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

constexpr double kBoundStateRelTol = 1e-8;
constexpr double kPrincipalDifferenceTol = 1e-8;
constexpr double kPseudoResolventTol = 1e-7;
constexpr double kLogShapeVariation = 0.5;
constexpr double kRouteAgreementTol = 1e-8;
constexpr double kSubordinationTol = 1e-9;
constexpr double kDecaySlope = -1.0, kDecayWindow = 0.1;
constexpr double kLeeExponent = 2.0, kLeeWindow = 0.2;
constexpr double kSymmetryTol = 1e-9;

struct Outcome {
    bool pass = false;
    std::string detail;
};

bool report_ok(const BoundReport& r) {
    return r.verdict == Verdict::holds || r.verdict == Verdict::holds_with_calibration;
}

double max_value(const BoundReport& r) {
    double v = 0.0;
    for (const auto& x : r.values) v = std::max(v, x.value);
    return v;
}

std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

ManifoldSpec square_torus(int dim, double kappa) { return ManifoldSpec::flat_torus(std::vector<double>(dim, kTwoPi), kappa); }

// independent oracle: adaptive double-exponential Laplace integrals of the heat kernel
double oracle_laplace(const std::function<double(double)>& f) {
    boost::math::quadrature::exp_sinh<double> q;
    return q.integrate(f, 1e-12);
}

cplx oracle_free_resolvent(const ManifoldSpec& m, const Point& x, const Point& y, cplx e) {
    auto g = [&](double t) -> cplx {
        if (t < 1e-8 || t * -e.real() > 700.0) return 0.0;
        return heat_kernel(m, x, y, t) * std::exp(t * e);
    };
    const double re = oracle_laplace([&](double t) { return g(t).real(); });
    const double im = oracle_laplace([&](double t) { return g(t).imag(); });
    return {re, im};
}

/// int_0^inf K_t(a,a) (e^{t e1} - e^{t e2}) dt; below t = 1e-8 the kernel is its flat-space leading term.
cplx oracle_diagonal_difference(const ManifoldSpec& m, const Point& a, cplx e1, cplx e2) {
    auto g = [&](double t) -> cplx {
        if (t * std::min(-e1.real(), -e2.real()) > 700.0) return 0.0;
        const cplx w = t * (e1 - e2);
        const cplx d = std::abs(w) < 1e-6 ? std::exp(t * e2) * w * (1.0 + 0.5 * w) : std::exp(t * e1) - std::exp(t * e2);
        const double k = t < 1e-8 ? 1.0 / (4.0 * std::numbers::pi * m.kappa() * t) : heat_kernel(m, a, a, t);
        return k * d;
    };
    const double re = oracle_laplace([&](double t) { return g(t).real(); });
    const double im = oracle_laplace([&](double t) { return g(t).imag(); });
    return {re, im};
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
    double worst = 0.0;
    int count = 0;
    bool all_single = true;
    for (int dim : {2, 3})
        for (double mass : {0.5, 1.0})
            for (double mu : {0.25, 1.0, 4.0}) {
                const ManifoldSpec m = ManifoldSpec::flat_space(dim, 0.5 / mass);
                const CenterSet c{{flat_point(0, 0, 0)}, {mu}};
                const auto res = bound_states(m, c, -100.0 * mu * mu, -1e-4 * mu * mu);
                if (res.states.size() != 1) {
                    all_single = false;
                    continue;
                }
                const double exact = -mu * mu;
                worst = std::max(worst, std::abs(res.states[0].energy - exact) / std::abs(exact));
                ++count;
            }
    return {all_single && worst <= kBoundStateRelTol,
            "max rel error " + sci(worst) + " over " + std::to_string(count) + " cases (tol " + sci(kBoundStateRelTol) + ")"};
}

Outcome criterion2() {
    double worst = 0.0;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> re(-20.0, -0.5), im(-3.0, 3.0), mu_d(0.5, 1.5);
    for (int geo = 0; geo < 2; ++geo) {
        const ManifoldSpec m = geo == 0 ? square_torus(2, 0.5) : ManifoldSpec::sphere(1.0, 0.5);
        const auto pts = random_points(m, 3, 11 + geo);
        const CenterSet c{pts, {mu_d(rng), mu_d(rng), mu_d(rng)}};
        for (int p = 0; p < 5; ++p) {
            const cplx e1(re(rng), im(rng)), e2(re(rng), im(rng));
            const CMatrix p1 = principal_matrix(m, c, e1).phi;
            const CMatrix p2 = principal_matrix(m, c, e2).phi;
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) {
                    const cplx lhs = p2(i, j) - p1(i, j);
                    const cplx rhs = i == j ? oracle_diagonal_difference(m, pts[i], e1, e2)
                                            : oracle_free_resolvent(m, pts[i], pts[j], e1) -
                                                  oracle_free_resolvent(m, pts[i], pts[j], e2);
                    worst = std::max(worst, std::abs(lhs - rhs) / std::abs(p1(i, j)));
                }
        }
    }
    return {worst <= kPrincipalDifferenceTol,
            "max rel residual " + sci(worst) + " (torus, sphere; N=3; 5 pairs; tol " + sci(kPrincipalDifferenceTol) + ")"};
}

Outcome criterion3() {
    const ManifoldSpec m = square_torus(2, 0.5);
    const CenterSet c{{torus_point(m, {1.0, 1.0, 0.0}), torus_point(m, {4.0, 3.5, 0.0})}, {1.0, 0.7}};
    auto basis = std::make_shared<const SpectralBasis>(spectral_basis(m, 49));
    const FunctionCalculus fc(m, c);
    const auto battery = test_battery(basis, c, 20240601);
    const BoundReport r = check_resolvent_identity(fc, -3.0, -7.0, battery, kPseudoResolventTol);
    const BoundReport rc = check_resolvent_identity(fc, cplx(-3.0, 2.0), cplx(-7.0, -1.0), battery, kPseudoResolventTol);
    const double worst = std::max(max_value(r), max_value(rc));
    return {report_ok(r) && report_ok(rc),
            "max residual " + sci(worst) + " over " + std::to_string(battery.size()) + " functions (tol " +
                sci(kPseudoResolventTol) + ")"};
}

Outcome criterion4() {
    const ManifoldSpec m = square_torus(2, 0.5);
    const CenterSet c{{torus_point(m, {1.0, 1.0, 0.0})}, {1.0}};
    auto basis = std::make_shared<const SpectralBasis>(spectral_basis(m, 25));
    const FunctionCalculus fc(m, c);
    const auto battery = test_battery(basis, c, 20240601);
    const auto res = check_strong_limit(fc, battery.front().f, 2.0, 4096, 16, true);
    return {res.decreasing && res.log_shape_variation < kLogShapeVariation,
            std::string("e_k ") + (res.decreasing ? "decreasing" : "not decreasing") + " for 16 <= k <= 4096; " +
                "ln-shape variation " + sci(res.log_shape_variation) + " (< " + sci(kLogShapeVariation) + ")"};
}

Outcome criterion5() {
    const ManifoldSpec m = square_torus(2, 1.0);
    double worst = 0.0;
    for (int n : {1, 2}) {
        std::vector<Point> centers{torus_point(m, {1.0, 1.0, 0.0})};
        std::vector<double> mu{0.5};
        if (n == 2) {
            centers.push_back(torus_point(m, {4.0, 3.5, 0.0}));
            mu.push_back(0.3);
        }
        const RelativisticModel model(m, centers, mu, 1.0);
        for (double e : {-1.0, -10.0, -100.0}) {
            const CMatrix q = principal_matrix_quadrature(model, e);
            const CMatrix s = principal_matrix_modesum(model, e).phi;
            worst = std::max(worst, (q - s).cwiseAbs().maxCoeff() / q.cwiseAbs().maxCoeff());
        }
    }
    const BoundReport sub = check_subordination(1.0, {0.5, 1.0, 3.0}, {0.0, 1.0, 2.25}, kSubordinationTol);
    return {worst <= kRouteAgreementTol && report_ok(sub),
            "route rel diff " + sci(worst) + " (tol " + sci(kRouteAgreementTol) + "); subordination max " +
                sci(max_value(sub)) + " (tol " + sci(kSubordinationTol) + ")"};
}

Outcome criterion6() {
    const ManifoldSpec m = square_torus(2, 1.0);
    const RelativisticModel model(m, {torus_point(m, {1.0, 1.0, 0.0})}, {0.5}, 1.0);
    const BoundReport r = check_decay(model, 0, {1e2, 1e3, 1e4, 1e5, 1e6}, kDecayWindow);
    const double slope = r.exponent_fit ? r.exponent_fit->slope : std::numeric_limits<double>::quiet_NaN();
    return {report_ok(r) && std::abs(slope - kDecaySlope) <= kDecayWindow,
            "slope " + sci(slope) + " (expected " + sci(kDecaySlope) + " +- " + sci(kDecayWindow) + ")"};
}

Outcome criterion7() {
    const ManifoldSpec m = square_torus(2, 0.5);
    const LeeModelSpec spec(m, torus_point(m, {1.0, 1.0, 0.0}), 0.5, 1.0, 0.5);
    ConstantsRegistry reg;
    reg.insert(spec.manifold(), calibrate_heat_bound(spec.manifold()));
    const BoundReport r = check_lee_ground_state(spec, spectral_basis(spec.manifold(), 25), 25, 2, 1, {0.1, 0.5, 1.0}, reg,
                                                 kLeeWindow);
    const double slope = r.exponent_fit ? r.exponent_fit->slope : std::numeric_limits<double>::quiet_NaN();
    return {r.verdict == Verdict::holds_with_calibration && std::abs(slope - kLeeExponent) <= kLeeWindow,
            "verdict " + to_string(r.verdict) + "; departure exponent " + sci(slope) + " (expected " + sci(kLeeExponent) +
                " +- " + sci(kLeeWindow) + ")"};
}

Outcome criterion8() {
    std::vector<BoundReport> reports;
    const std::vector<double> sweep{1e2, 3e2, 1e3, 3e3, 1e4};
    const ManifoldSpec t2 = square_torus(2, 0.5);
    const ManifoldSpec f3 = ManifoldSpec::flat_space(3, 0.5);
    const CenterSet c2{{torus_point(t2, {1.0, 1.0, 0.0}), torus_point(t2, {4.0, 3.5, 0.0})}, {1.0, 0.7}};
    const CenterSet c3{{flat_point(0, 0, 0), flat_point(1.5, 0, 0)}, {0.5, 0.8}};
    reports.push_back(check_alpha_scaling(t2, c2, sweep));
    reports.push_back(check_alpha_scaling(f3, c3, sweep));
    reports.push_back(check_phi_inverse_scaling(t2, c2, sweep));
    reports.push_back(check_phi_inverse_scaling(f3, c3, sweep));
    for (const ManifoldSpec& m : {t2, ManifoldSpec::sphere(1.0, 0.5), ManifoldSpec::hyperbolic(1.0, 0.5),
                                  ManifoldSpec::flat_space(2, 0.5), f3}) {
        ConstantsRegistry reg;
        reg.insert(m, calibrate_heat_bound(m));
        reports.push_back(check_heat_bounds(m, reg));
    }
    reports.push_back(check_jacobian_bounds(ManifoldSpec::sphere(1.0, 0.5)));
    reports.push_back(check_jacobian_bounds(ManifoldSpec::hyperbolic(1.0, 0.5)));
    int ok = 0;
    std::string failed;
    for (const auto& r : reports) {
        if (report_ok(r)) ++ok;
        else failed += " " + r.check + "@" + r.geometry;
    }
    return {ok == static_cast<int>(reports.size()),
            std::to_string(ok) + "/" + std::to_string(reports.size()) + " reports hold" + (failed.empty() ? "" : ";" + failed)};
}

Outcome criterion9() {
    double worst = 0.0;
    bool ok = true;
    const std::vector<cplx> energies{cplx(-5.0, 2.0), cplx(-0.8, -3.0)};
    const ManifoldSpec t2 = square_torus(2, 0.5);
    const CenterSet c{{torus_point(t2, {1.0, 1.0, 0.0}), torus_point(t2, {4.0, 3.5, 0.0})}, {1.0, 0.7}};
    const ManifoldSpec tr = square_torus(2, 1.0);
    const RelativisticModel rel(tr, {torus_point(tr, {1.0, 1.0, 0.0}), torus_point(tr, {4.0, 3.5, 0.0})}, {0.5, 0.3}, 1.0);
    const SpectralBasis rel_basis = spectral_basis(tr, 49);
    const LeeModelSpec lee(t2, torus_point(t2, {1.0, 1.0, 0.0}), 0.5, 1.0, 0.5);
    const LeePrincipalOperator op(lee, spectral_basis(t2, 25), FockBasis(25, 2), 1);
    for (const cplx e : energies) {
        for (const BoundReport& r : {check_symmetry(t2, c, e, random_points(t2, 4, 5), kSymmetryTol),
                                     check_symmetry(rel, rel_basis, e, kSymmetryTol), check_symmetry(op, e, kSymmetryTol)}) {
            ok = ok && report_ok(r);
            worst = std::max(worst, max_value(r));
        }
    }
    return {ok, "max residual " + sci(worst) + " over 3 models x 2 energies (tol " + sci(kSymmetryTol) + ")"};
}

} // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        double limit_seconds;
        Outcome (*run)();
    };
    const Criterion criteria[] = {
        {1, "flat-space bound states", 5.0, criterion1},
        {2, "principal-difference identity", 60.0, criterion2},
        {3, "pseudo-resolvent identity", 120.0, criterion3},
        {4, "strong-limit probe", 600.0, criterion4},
        {5, "relativistic route agreement", 120.0, criterion5},
        {6, "decay functional slope", 60.0, criterion6},
        {7, "Lee ground-state bound", 600.0, criterion7},
        {8, "bound-shape suite", 300.0, criterion8},
        {9, "resolvent symmetry", 60.0, criterion9},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool in_time = secs < c.limit_seconds;
        const bool pass = o.pass && in_time;
        if (!pass) ++failures;
        std::printf("%s criterion %d (%s): %s; %.2f s (limit %.0f s)\n", pass ? "PASS" : "FAIL", c.id, c.name,
                    o.detail.c_str(), secs, c.limit_seconds);
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
