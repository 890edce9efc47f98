#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "renorm/lee.hpp"

using namespace renorm;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double pi = std::numbers::pi;

ManifoldSpec torus2() { return ManifoldSpec::flat_torus({2.0 * pi, 2.0 * pi}, 0.5); }

LeeModelSpec torus_spec(double coupling = 0.5, double mu = 0.5) {
    const auto m = torus2();
    return {m, torus_point(m, {1.0, 2.0, 0.0}), coupling, 1.0, mu};
}

double min_eig(const CMatrix& a) { return detail::hermitian_eigenvalues(a).minCoeff(); }
double max_eig(const CMatrix& a) { return detail::hermitian_eigenvalues(a).maxCoeff(); }

// annihilation operator for mode s on the full Fock space, from occupation vectors
CMatrix annihilator(const FockBasis& fock, int s) {
    CMatrix a = CMatrix::Zero(fock.size(), fock.size());
    for (int g = 0; g < fock.size(); ++g) {
        auto occ = fock.occupations(g);
        if (occ[s] == 0) continue;
        const double amp = std::sqrt(double(occ[s]));
        --occ[s];
        std::vector<int> ms;
        for (int k = 0; k < fock.modes(); ++k)
            for (int r = 0; r < occ[k]; ++r) ms.push_back(k);
        a(fock.index_of(ms), g) = amp;
    }
    return a;
}

} // namespace

TEST_CASE("Fock basis size and graded lexicographic order", "[lee]") {
    const FockBasis f(25, 2);
    CHECK(f.size() == 1 + 25 + 325);
    CHECK(f.size() == FockBasis::expected_size(25, 2));
    CHECK(FockBasis(4, 3).size() == FockBasis::expected_size(4, 3));
    CHECK(f.state(0).empty());
    CHECK(f.state(1) == std::vector<int>{0});
    CHECK(f.state(26) == std::vector<int>{0, 0});
    CHECK(f.state(27) == std::vector<int>{0, 1});
    CHECK(f.state(f.size() - 1) == std::vector<int>{24, 24});
    CHECK(f.sector(1) == std::pair<int, int>{1, 26});
    for (int i = 0; i < f.size(); ++i) CHECK(f.index_of(f.state(i)) == i);
    CHECK_THROWS_AS(FockBasis(0, 1), domain_error);
}

TEST_CASE("free boson Hamiltonian", "[lee]") {
    const auto spec = torus_spec();
    const auto basis = spectral_basis(spec.manifold(), 9);
    const FockBasis f(9, 2);
    const auto h = build_h0(spec, basis, f);
    CHECK(h(0) == 0.0);
    CHECK_THAT(h(1), WithinAbs(1.0, 1e-15));
    const int i = f.index_of({1, 5});
    CHECK_THAT(h(i), WithinRel(0.5 * (basis.eigenvalue(1) + basis.eigenvalue(5)) + 2.0, 1e-14));
}

TEST_CASE("vacuum principal scalar in flat three-dimensional space", "[lee]") {
    const double m = 1.0, mu = 0.4, lam = 0.7;
    const LeeModelSpec spec(ManifoldSpec::flat_space(3, 0.5), flat_point(0, 0, 0), lam, m, mu);
    for (double e : {-3.0, -0.5, 0.3}) {
        const double exact =
            -e + mu + lam * lam * std::pow(m / (2 * pi), 1.5) * 2 * std::sqrt(pi) * (std::sqrt(m - e) - std::sqrt(m - mu));
        CHECK_THAT(lee_vacuum_phi(spec, e).real(), WithinRel(exact, 1e-9));
    }
    CHECK_THROWS_AS(lee_vacuum_phi(spec, mu), domain_error);
    const auto weak = spec.with_coupling(1e-8);
    CHECK_THAT(lee_vacuum_phi(weak, mu - 1e-6).real(), WithinAbs(1e-6, 1e-12));
    const cplx z{-1.0, 0.8};
    CHECK(std::abs(lee_vacuum_phi(spec, std::conj(z)) - std::conj(lee_vacuum_phi(spec, z))) < 1e-13);
}

TEST_CASE("S1 matches the spectral mode sum on the torus", "[lee]") {
    const auto spec = torus_spec();
    const double h = 2.0, e = -1.5;
    // sum_k (1/V)[1/(k^2/2 + m - mu) - 1/(k^2/2 + h + m - E)] with continuum tail
    const double km = 400.0;
    double sum = 0.0;
    for (int i = -400; i <= 400; ++i)
        for (int j = -400; j <= 400; ++j) {
            const double k2 = double(i) * i + double(j) * j;
            if (k2 > km * km) continue;
            sum += 1.0 / (0.5 * k2 + 0.5) - 1.0 / (0.5 * k2 + h + 1.0 - e);
        }
    const double v = 4 * pi * pi;
    sum /= v;
    // (1/2pi) int_K k dk [...] = (1/2pi) ln((K^2/2 + h + m - E)/(K^2/2 + m - mu))
    sum += std::log((0.5 * km * km + h + 1.0 - e) / (0.5 * km * km + 0.5)) / (2 * pi);
    CHECK_THAT(lee_s1(spec, h, e).real(), WithinAbs(sum, 1e-7));
}

TEST_CASE("S2 against explicit creation and annihilation operators", "[lee]") {
    const auto spec = torus_spec();
    const int modes = 5;
    const auto basis = spectral_basis(spec.manifold(), modes);
    const FockBasis fock(modes, 2);
    const auto h0 = build_h0(spec, basis, fock);
    const double e = -0.7;
    std::vector<CMatrix> a;
    for (int s = 0; s < modes; ++s) a.push_back(annihilator(fock, s));
    CMatrix full = CMatrix::Zero(fock.size(), fock.size());
    for (int s = 0; s < modes; ++s)
        for (int t = 0; t < modes; ++t) {
            // int dt e^{-t kappa (l_s + l_t)} e^{-t (H0 + 2m - E)} on the reduced state
            CMatrix w = CMatrix::Zero(fock.size(), fock.size());
            for (int k = 0; k < fock.size(); ++k)
                w(k, k) = 1.0 / (0.5 * (basis.eigenvalue(s) + basis.eigenvalue(t)) + h0(k) + 2.0 - e);
            full += std::conj(basis.evaluate(s, spec.center())) * basis.evaluate(t, spec.center()) *
                    a[s].adjoint() * w * a[t];
        }
    for (int n : {1, 2}) {
        const LeePrincipalOperator op(spec, basis, fock, n);
        const auto [first, last] = fock.sector(n);
        const CMatrix block = full.block(first, first, last - first, last - first);
        CHECK((op.s2(e) - block).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("K/U splitting: reconstruction, signs, symmetry", "[lee]") {
    const auto spec = torus_spec(0.8);
    const auto basis = spectral_basis(spec.manifold(), 9);
    const FockBasis fock(9, 2);
    for (int n : {1, 2}) {
        const LeePrincipalOperator op(spec, basis, fock, n);
        for (double e : {op.threshold() - 0.2, op.threshold() - 3.0, -20.0}) {
            const LeeSplit s = op.split(e);
            CHECK((s.phi() - op.phi(e)).cwiseAbs().maxCoeff() <= 1e-12);
            CHECK(s.k.minCoeff() >= n * 1.0 - e + spec.mu() - 1e-12);
            CHECK(max_eig(s.u1) <= 1e-12);
            CHECK(min_eig(s.u2) >= -1e-12);
            const CMatrix phi = op.phi(e);
            CHECK((phi - phi.adjoint()).cwiseAbs().maxCoeff() <= 1e-12);
        }
        const cplx z{op.threshold() - 1.0, 0.6};
        CHECK((op.phi(std::conj(z)) - op.phi(z).adjoint()).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK_THROWS_AS(op.phi(op.threshold() + 0.1), domain_error);
    }
}

TEST_CASE("U2 tilde norm and the strict positivity mechanism", "[lee]") {
    const auto basis = spectral_basis(torus2(), 9);
    const FockBasis fock(9, 2);
    const LeePrincipalOperator a(torus_spec(0.1), basis, fock, 1), b(torus_spec(0.2), basis, fock, 1);
    CHECK_THAT(b.u2_tilde_norm(-1.0), WithinRel(4.0 * a.u2_tilde_norm(-1.0), 1e-12));
    double prev = 1e300;
    for (double e = 1.4; e > -50.0; e -= 3.0) {
        const double v = b.u2_tilde_norm(e);
        CHECK(v < prev);
        prev = v;
    }
    int covered = 0;
    for (double lam : {0.5, 1.5, 3.0})
        for (double e : {1.45, 1.3, 1.0, 0.0, -2.0, -10.0}) {
            const LeePrincipalOperator op(torus_spec(lam), basis, fock, 1);
            const LeeSplit s = op.split(e);
            if (op.tilde_norm(s.u2, s.k) < 1.0 && max_eig(s.u1) <= 1e-12) {
                ++covered;
                CHECK(min_eig(s.phi()) > 0.0);
            }
        }
    CHECK(covered >= 6);
}

TEST_CASE("ground-state lower bound formula", "[lee]") {
    const auto m = torus2();
    ConstantsRegistry reg;
    reg.insert(m, calibrate_heat_bound(m));
    const auto lb = ground_state_lower_bound(2, 1, 1e-6, 1.0, 0.5, m, reg);
    CHECK_THAT(lb.value, WithinAbs(1.5, 1e-9));
    CHECK(lb.exponent == 1.0);
    CHECK(ground_state_lower_bound(2, 0, 0.7, 1.0, 0.5, m, reg).value == 0.5);
    const auto l1 = ground_state_lower_bound(2, 1, 0.5, 1.0, 0.5, m, reg);
    const auto l2 = ground_state_lower_bound(2, 1, 1.0, 1.0, 0.5, m, reg);
    CHECK_THAT(1.5 - l2.value, WithinRel(4.0 * (1.5 - l1.value), 1e-12));
    CHECK(l1.provenance == "calibrated");
    CHECK_THROWS_AS(ground_state_lower_bound(2, 1, 0.5, 1.0, -0.2, m, reg), domain_error);
    CHECK_THROWS_AS(ground_state_lower_bound(2, 1, 0.5, 1.0, 0.5, ManifoldSpec::sphere(1.0, 0.5), reg),
                    missing_constants_error);
    const auto flat = ManifoldSpec::flat_space(3, 0.5);
    reg.insert(flat, calibrate_heat_bound(flat));
    const auto ch = ground_state_lower_bound(3, 1, 0.3, 1.0, -0.1, flat, reg);
    CHECK(ch.exponent == 2.0);
    CHECK(ch.value < 0.9);
}

TEST_CASE("ground state: lower bound, weak coupling and truncation monotonicity", "[lee]") {
    const auto m = torus2();
    ConstantsRegistry reg;
    reg.insert(m, calibrate_heat_bound(m));
    const auto basis = spectral_basis(m, 13);
    double prev = 1e300;
    for (int modes : {5, 9, 13}) {
        const auto g = ground_state_energy(torus_spec(0.8), basis, modes, 1, 1, -20.0, 1.5 - 1e-9);
        REQUIRE(g.found);
        CHECK(g.energy <= prev + 1e-12);
        prev = g.energy;
        const auto lb = ground_state_lower_bound(2, 1, 0.8, 1.0, 0.5, m, reg);
        CHECK(g.energy >= lb.value);
        const LeePrincipalOperator op(torus_spec(0.8), basis, FockBasis(modes, 1), 1);
        CHECK(std::abs(min_eig(op.phi(g.energy))) < 1e-9);
    }
    std::vector<double> lams, gaps;
    for (double lam : {0.05, 0.1, 0.2}) {
        const auto g = ground_state_energy(torus_spec(lam), basis, 9, 1, 1, -5.0, 1.5 - 1e-12);
        REQUIRE(g.found);
        lams.push_back(lam);
        gaps.push_back(1.5 - g.energy);
    }
    CHECK_THAT(fit_loglog(lams, gaps).slope, WithinAbs(2.0, 0.05));
    const auto none = ground_state_energy(torus_spec(0.5), basis, 9, 1, 0, -20.0, 0.5 - 1e-9);
    CHECK_FALSE(none.found);
}

TEST_CASE("U1 tilde decay and relative bound reports", "[lee]") {
    const auto basis = spectral_basis(torus2(), 9);
    const FockBasis fock(9, 2);
    const LeePrincipalOperator op1(torus_spec(0.5), basis, fock, 1), op2(torus_spec(0.5), basis, fock, 2);
    std::vector<double> grid;
    for (double a = 1e2; a <= 1e6 * 1.0001; a *= 10.0) grid.push_back(a);
    const auto r = u1_tilde_bound_check(op1, grid);
    CHECK(r.verdict == Verdict::holds_with_calibration);
    CHECK(r.exponent_fit->slope <= -0.5);
    const LeePrincipalOperator op1b(torus_spec(1.0), basis, fock, 1);
    CHECK_THAT(op1b.u1_tilde_norm(-100.0), WithinRel(4.0 * op1.u1_tilde_norm(-100.0), 1e-12));

    const auto rb = relative_bound_check(op1, op2, {0.5 - 1e-3, 0.0, -10.0, -100.0, -1e3, -1e4});
    CHECK(rb.verdict == Verdict::holds_with_calibration);
    const LeePrincipalOperator tiny(torus_spec(1e-6), basis, fock, 1);
    CHECK(tiny.relative_bound(0.0) < 1e-10);
}
