#pragma once

// Relativistic point interactions in two dimensions (no-particle and
// one-particle sectors). The principal matrix is available by two routes:
// the subordinated heat-kernel double integral and the frequency mode sum
// Psi_ij(E) = sum_sigma f_sigma(a_i) conj f_sigma(a_j) / (omega (omega - E)),
// omega = sqrt(lambda + m^2).

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "renorm/errors.hpp"
#include "renorm/manifold.hpp"
#include "renorm/pointinteraction.hpp"
#include "renorm/specialfn.hpp"

namespace renorm {

class RelativisticModel {
public:
    RelativisticModel(ManifoldSpec manifold, std::vector<Point> centers, std::vector<double> mu, double mass)
        : manifold_(std::move(manifold)), centers_(std::move(centers)), mu_(std::move(mu)), mass_(mass) {
        if (manifold_.dimension() != 2) throw domain_error("RelativisticModel: two-dimensional manifolds only");
        if (manifold_.kappa() != 1.0) throw domain_error("RelativisticModel: the heat kernel must use kappa = 1");
        if (!(mass_ > 0.0)) throw domain_error("RelativisticModel: boson mass must be positive");
        if (centers_.empty() || centers_.size() != mu_.size())
            throw domain_error("RelativisticModel: need one mu per center");
        for (double v : mu_)
            if (!(v < mass_)) throw domain_error("RelativisticModel: mu_i must lie below the boson mass");
        for (std::size_t i = 0; i < centers_.size(); ++i)
            for (std::size_t j = i + 1; j < centers_.size(); ++j)
                if (geodesic_distance(manifold_, centers_[i], centers_[j]) < 1e-12)
                    throw domain_error("RelativisticModel: centers must be pairwise distinct");
    }

    const ManifoldSpec& manifold() const { return manifold_; }
    const std::vector<Point>& centers() const { return centers_; }
    const std::vector<double>& mu() const { return mu_; }
    double mass() const { return mass_; }
    int size() const { return static_cast<int>(centers_.size()); }
    double min_mu() const { return *std::min_element(mu_.begin(), mu_.end()); }

    double omega(double lambda) const { return std::sqrt(lambda + mass_ * mass_); }

private:
    ManifoldSpec manifold_;
    std::vector<Point> centers_;
    std::vector<double> mu_;
    double mass_;
};

// ---------------------------------------------------------------------------
// quadrature route

/// Phi_ii = pi^{-1/2} int ds e^{-s^2/4} int du (e^{s mu_i sqrt u} - e^{s E sqrt u}) e^{-u m^2} K_u(a_i, a_i),
/// Phi_ij = -pi^{-1/2} int ds e^{-s^2/4} int du e^{s E sqrt u} e^{-u m^2} K_u(a_i, a_j).
inline CMatrix principal_matrix_quadrature(const RelativisticModel& model, cplx e,
                                           const QuadratureSpec& q = default_resolvent_quadrature()) {
    if (!(e.real() <= model.min_mu())) throw domain_error("principal_matrix_quadrature: Re(E) must not exceed min mu");
    const int n = model.size();
    const double m2 = model.mass() * model.mass();
    const auto& mf = model.manifold();
    const double norm = 1.0 / std::sqrt(std::numbers::pi);
    CMatrix phi = CMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        const Point& a = model.centers()[i];
        const cplx mu = model.mu()[i];
        phi(i, i) = norm * double_integral_su(
                               [&](double s, double u) {
                                   return heat_kernel(mf, a, a, u) * exp_difference<cplx>(s * mu, s * e, std::sqrt(u));
                               },
                               true, m2, q);
        for (int j = i + 1; j < n; ++j) {
            const Point& b = model.centers()[j];
            const cplx v = -norm * double_integral_su(
                                       [&](double s, double u) {
                                           return heat_kernel(mf, a, b, u) * std::exp(s * e * std::sqrt(u));
                                       },
                                       true, m2, q);
            phi(i, j) = v;
            phi(j, i) = v;
        }
    }
    return phi;
}

// ---------------------------------------------------------------------------
// subordination identity

struct SubordinationResult {
    double lhs;
    double rhs;
    double residual;
};

/// e^{-s omega} versus (s / 2 sqrt(pi)) int du u^{-3/2} e^{-s^2/4u - (m^2 + lambda) u}.
inline SubordinationResult subordination_check(double s, double mass, double lambda, const QuadratureSpec& q = {}) {
    if (!(s > 0.0)) throw domain_error("subordination_check: s must be positive");
    if (mass < 0.0 || lambda < 0.0) throw domain_error("subordination_check: m and lambda must be non-negative");
    const double c = mass * mass + lambda;
    // v = s^2 / 4u turns the integral into pi^{-1/2} int dv v^{-1/2} e^{-v} e^{-c s^2 / 4v}
    const double rhs = laplace_integral(
                           [&](double v) { return std::exp(-c * s * s / (4.0 * v)) / std::sqrt(v); }, 1.0, q) /
                       std::sqrt(std::numbers::pi);
    const double lhs = std::exp(-s * std::sqrt(c));
    return {lhs, rhs, std::abs(lhs - rhs) / lhs};
}

// ---------------------------------------------------------------------------
// mode sums on flat two-dimensional tori
//
// 1/(omega (omega - z)) = int_0^inf ds e^{s z} e^{-s omega} / omega, so every mode sum is an
// s-integral of F(s, delta) = (1/V) sum_k cos(k.delta) e^{-s omega_k} / omega_k. For s below
// the crossover F is evaluated by images, (1/2pi) sum_n e^{-m rho_n} / rho_n with
// rho_n = sqrt(|delta + n L|^2 + s^2); above it the mode sum is truncated with a tail bound.

struct ModeSumOptions {
    double mode_tolerance = 1e-16;   ///< pointwise bound on the neglected modes of F
    long long max_modes = 20000000;  ///< refuse (truncation_error) beyond this
    QuadratureSpec quadrature{64, 1e-12, 4000, 24.0};
};

struct ModeSumValue {
    CMatrix phi;
    double tail_estimate; ///< bound on the contribution of the neglected modes to each entry
    long long modes;      ///< lattice modes summed explicitly
};

namespace detail {

class PoissonKernelSum {
public:
    PoissonKernelSum(const ManifoldSpec& m, double mass, const ModeSumOptions& opt) : m_(m), mass_(mass) {
        if (m.kind() != GeometryKind::FlatTorus || m.dimension() != 2)
            throw unsupported_error("mode-sum route is implemented for flat two-dimensional tori");
        lx_ = m.sides()[0];
        ly_ = m.sides()[1];
        crossover_ = 0.5 * std::min(lx_, ly_);
        // (1/2pi) e^{-s omega_K} / s <= tolerance at the crossover
        omega_cut_ = std::max(mass, std::log(1.0 / (2.0 * std::numbers::pi * crossover_ * opt.mode_tolerance)) / crossover_);
        const double k_cut = std::sqrt(std::max(0.0, omega_cut_ * omega_cut_ - mass * mass));
        const double estimate = k_cut * k_cut * m.volume() / (4.0 * std::numbers::pi);
        if (estimate > static_cast<double>(opt.max_modes))
            throw truncation_error("mode sum needs about " + std::to_string(static_cast<long long>(estimate)) +
                                   " modes, above the configured maximum");
        const double qx = 2.0 * std::numbers::pi / lx_, qy = 2.0 * std::numbers::pi / ly_;
        const int ni = static_cast<int>(std::floor(k_cut / qx));
        for (int i = -ni; i <= ni; ++i) {
            const double kx = qx * i;
            const int nj = static_cast<int>(std::floor(std::sqrt(std::max(0.0, k_cut * k_cut - kx * kx)) / qy));
            for (int j = -nj; j <= nj; ++j) {
                kx_.push_back(kx);
                ky_.push_back(qy * j);
                omega_.push_back(std::sqrt(kx * kx + qy * qy * j * j + mass * mass));
            }
        }
        reach_ = 42.0 / mass + std::hypot(lx_, ly_);
    }

    double crossover() const { return crossover_; }
    double omega_cut() const { return omega_cut_; }
    long long modes() const { return static_cast<long long>(omega_.size()); }

    double operator()(double s, const std::array<double, 3>& d) const {
        return s < crossover_ ? images(s, d) : mode_sum(s, d);
    }

    /// Bound on int_{crossover}^inf e^{s Re z} (neglected modes of F) ds.
    double tail_bound(double re_z) const {
        const double gap = omega_cut_ - re_z;
        return std::exp(-crossover_ * gap) / (2.0 * std::numbers::pi * crossover_ * gap);
    }

private:
    double images(double s, const std::array<double, 3>& d) const {
        const int nx = static_cast<int>(std::ceil(reach_ / lx_));
        const int ny = static_cast<int>(std::ceil(reach_ / ly_));
        double sum = 0.0;
        for (int i = -nx; i <= nx; ++i) {
            const double x = d[0] + i * lx_;
            if (std::abs(x) > reach_) continue;
            for (int j = -ny; j <= ny; ++j) {
                const double y = d[1] + j * ly_;
                const double rho = std::sqrt(x * x + y * y + s * s);
                if (rho > reach_) continue;
                sum += std::exp(-mass_ * rho) / rho;
            }
        }
        return sum / (2.0 * std::numbers::pi);
    }

    double mode_sum(double s, const std::array<double, 3>& d) const {
        double sum = 0.0;
        for (std::size_t k = 0; k < omega_.size(); ++k)
            sum += std::cos(kx_[k] * d[0] + ky_[k] * d[1]) * std::exp(-s * omega_[k]) / omega_[k];
        return sum / m_.volume();
    }

    ManifoldSpec m_;
    double mass_, lx_ = 0, ly_ = 0, crossover_ = 0, omega_cut_ = 0, reach_ = 0;
    std::vector<double> kx_, ky_, omega_;
};

/// int_0^inf g(s) F(s, d) ds where g decays like e^{-rate s}.
template <class G>
cplx poisson_integral(const PoissonKernelSum& f, const std::array<double, 3>& d, const G& g, double rate,
                      const QuadratureSpec& q) {
    const double sc = f.crossover();
    auto integrand = [&](double s) { return cplx(g(s)) * f(s, d); };
    const double width = std::hypot(d[0], d[1]);
    const double first = std::min(sc, std::max(width, 1e-3 * sc));
    std::vector<double> head = graded_breaks(0.0, first, 6);
    if (first < sc) head.push_back(sc);
    cplx v = integrate_adaptive(integrand, head, q).value;
    const double end = sc + 45.0 / rate;
    v += integrate_adaptive(integrand, graded_breaks(sc, end, 4), q).value;
    return v;
}

} // namespace detail

/// Phi_ii = Psi_ii(mu_i) - Psi_ii(E), Phi_ij = -Psi_ij(E), all modes included (flat 2D tori).
inline ModeSumValue principal_matrix_modesum(const RelativisticModel& model, cplx e, const ModeSumOptions& opt = {}) {
    if (!(e.real() <= model.min_mu())) throw domain_error("principal_matrix_modesum: Re(E) must not exceed min mu");
    const auto& mf = model.manifold();
    const int n = model.size();
    const detail::PoissonKernelSum f(mf, model.mass(), opt);
    const double rate = model.mass() - e.real();
    ModeSumValue out{CMatrix::Zero(n, n), 0.0, f.modes()};
    const std::array<double, 3> origin{0.0, 0.0, 0.0};
    for (int i = 0; i < n; ++i) {
        const cplx mu = model.mu()[i];
        out.phi(i, i) = detail::poisson_integral(
            f, origin, [&](double s) { return exp_difference<cplx>(mu, e, s); }, model.mass() - model.mu()[i],
            opt.quadrature);
        for (int j = i + 1; j < n; ++j) {
            const auto d = torus_displacement(mf, model.centers()[i], model.centers()[j]);
            const cplx v = -detail::poisson_integral(
                f, d, [&](double s) { return std::exp(s * e); }, rate, opt.quadrature);
            out.phi(i, j) = v;
            out.phi(j, i) = v;
        }
    }
    out.tail_estimate = 2.0 * f.tail_bound(std::max(e.real(), model.min_mu()));
    return out;
}

/// Psi(E1) - Psi(E2) = sum_sigma f_sigma(a_i) conj f_sigma(a_j) (1/(omega - E1) - 1/(omega - E2)) / omega.
inline CMatrix psi_difference(const RelativisticModel& model, cplx e1, cplx e2, const ModeSumOptions& opt = {}) {
    const double top = std::max(e1.real(), e2.real());
    if (!(top < model.mass())) throw domain_error("psi_difference: Re(E) must lie below the boson mass");
    const auto& mf = model.manifold();
    const int n = model.size();
    const detail::PoissonKernelSum f(mf, model.mass(), opt);
    CMatrix out(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            const auto d = torus_displacement(mf, model.centers()[i], model.centers()[j]);
            out(i, j) = detail::poisson_integral(
                f, d, [&](double s) { return exp_difference<cplx>(e1, e2, s); }, model.mass() - top, opt.quadrature);
            out(j, i) = out(i, j);
        }
    return out;
}

/// Truncated mode-space objects on the first M eigenmodes: Psi_M(E) and the coupling
/// matrix B_{i sigma} = f_sigma(a_i) / sqrt(omega_sigma).
struct TruncatedRelativistic {
    Eigen::VectorXd omega;
    CMatrix coupling; ///< N x M

    CMatrix psi(cplx z) const {
        CMatrix d = CMatrix::Zero(omega.size(), omega.size());
        for (int s = 0; s < omega.size(); ++s) d(s, s) = 1.0 / (omega(s) - z);
        return coupling * d * coupling.adjoint();
    }

    CMatrix phi(const std::vector<double>& mu, cplx z) const {
        CMatrix out = -psi(z);
        for (int i = 0; i < out.rows(); ++i) out(i, i) += psi(mu[i])(i, i);
        return out;
    }

    /// R(E) = D + D B^dagger Phi^{-1} B D on the one-boson space, D = diag 1/(omega - E).
    CMatrix resolvent(const std::vector<double>& mu, cplx z) const {
        const int ms = static_cast<int>(omega.size());
        CMatrix d = CMatrix::Zero(ms, ms);
        for (int s = 0; s < ms; ++s) d(s, s) = 1.0 / (omega(s) - z);
        const CMatrix inv = checked_inverse(phi(mu, z));
        return d + d * coupling.adjoint() * inv * coupling * d;
    }
};

inline TruncatedRelativistic truncate(const RelativisticModel& model, const SpectralBasis& basis) {
    TruncatedRelativistic t;
    const int ms = basis.size();
    t.omega.resize(ms);
    t.coupling.resize(model.size(), ms);
    for (int s = 0; s < ms; ++s) {
        t.omega(s) = model.omega(basis.eigenvalue(s));
        for (int i = 0; i < model.size(); ++i)
            t.coupling(i, s) = basis.evaluate(s, model.centers()[i]) / std::sqrt(t.omega(s));
    }
    return t;
}

// ---------------------------------------------------------------------------
// decay functional I(E) = sum |f_sigma(a)|^2 / (omega (omega + |E|)^2)

struct DecayValue {
    double value;
    double tail_estimate;
    long long modes;
};

/// Plain truncation to the first M modes with a Weyl-law tail bound (1/4pi) int_{lambda_M} dl / (omega (omega+|E|)^2).
inline DecayValue decay_functional_truncated(const RelativisticModel& model, int center, double e,
                                             const SpectralBasis& basis) {
    if (!(e < 0.0)) throw domain_error("decay_functional: E must be negative");
    const double a = -e;
    double sum = 0.0;
    for (int s = 0; s < basis.size(); ++s) {
        const double w = model.omega(basis.eigenvalue(s));
        sum += std::norm(basis.evaluate(s, model.centers()[center])) / (w * (w + a) * (w + a));
    }
    // d lambda = 2 omega d omega: (1/4pi) int 2 d omega / (omega + a)^2 = 1 / (2 pi (omega_M + a))
    const double wm = model.omega(basis.eigenvalue(basis.size() - 1));
    return {sum, 1.0 / (2.0 * std::numbers::pi * (wm + a)), basis.size()};
}

/// All modes (flat 2D tori): I(E) = int_0^inf ds s e^{-s|E|} F(s, 0).
inline DecayValue decay_functional(const RelativisticModel& model, int center, double e, const ModeSumOptions& opt = {}) {
    if (!(e < 0.0)) throw domain_error("decay_functional: E must be negative");
    if (center < 0 || center >= model.size()) throw domain_error("decay_functional: no such center");
    const double a = -e;
    const detail::PoissonKernelSum f(model.manifold(), model.mass(), opt);
    const cplx v = detail::poisson_integral(
        f, {0.0, 0.0, 0.0}, [&](double s) { return s * std::exp(-a * s); }, model.mass() + a, opt.quadrature);
    return {v.real(), f.tail_bound(e), f.modes()};
}

// ---------------------------------------------------------------------------
// bound states

enum class RelativisticRoute { Quadrature, ModeSum };

inline CMatrix relativistic_phi(const RelativisticModel& model, cplx e, RelativisticRoute route,
                                const QuadratureSpec& q = default_resolvent_quadrature()) {
    if (route == RelativisticRoute::ModeSum) return principal_matrix_modesum(model, e).phi;
    return principal_matrix_quadrature(model, e, q);
}

inline BoundStateResult rel_bound_states(const RelativisticModel& model, double e_lo, double e_hi,
                                         RelativisticRoute route, int scan_points = 32) {
    if (!(e_hi < model.min_mu())) throw domain_error("rel_bound_states: window must lie below min mu");
    return eigenvalue_crossings([&](double e) { return relativistic_phi(model, e, route); }, e_lo, e_hi, scan_points,
                                model.min_mu());
}

} // namespace renorm
