#pragma once

// Non-relativistic N-center point interactions: free resolvent kernels as
// Laplace transforms of the heat kernel, the principal matrix Phi(E), the
// Krein-type resolvent R = R0 + R0(., a_i) Phi^{-1}_ij R0(a_j, .), bound
// states, and the resolvent acting on functions of compact manifolds.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <memory>
#include <numbers>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/tools/roots.hpp>

#include "renorm/errors.hpp"
#include "renorm/manifold.hpp"
#include "renorm/specialfn.hpp"

namespace renorm {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

struct CenterSet {
    std::vector<Point> positions;
    std::vector<double> mu; ///< binding scales; the single-center bound state sits at -mu^2

    int size() const { return static_cast<int>(positions.size()); }

    void validate(const ManifoldSpec& m) const {
        if (positions.empty()) throw domain_error("CenterSet: at least one center is required");
        if (mu.size() != positions.size()) throw domain_error("CenterSet: one mu per center is required");
        for (double v : mu)
            if (!(v > 0.0)) throw domain_error("CenterSet: mu must be positive");
        for (std::size_t i = 0; i < positions.size(); ++i)
            for (std::size_t j = i + 1; j < positions.size(); ++j)
                if (geodesic_distance(m, positions[i], positions[j]) < 1e-12)
                    throw domain_error("CenterSet: centers must be pairwise distinct");
    }
};

struct PrincipalMatrixValue {
    cplx energy;
    CMatrix phi;
};

inline QuadratureSpec default_resolvent_quadrature() {
    QuadratureSpec q;
    q.node_count = 32;
    q.relative_tolerance = 1e-12;
    q.max_refinements = 4000;
    return q;
}

namespace detail {

inline void require_left_half_plane(cplx e, const char* who) {
    if (!(e.real() < 0.0)) throw domain_error(std::string(who) + ": Re(E) must be negative");
}

/// u exp(b u) phi1((a - b) u) = (exp(a u) - exp(b u)) / (a - b), stable for a ~ b.
inline cplx exp_divided_difference(cplx a, cplx b, double u) {
    const cplx w = (a - b) * u;
    cplx phi1;
    if (std::abs(w) < 1e-3)
        phi1 = 1.0 + w * (0.5 + w * (1.0 / 6.0 + w * (1.0 / 24.0 + w / 120.0)));
    else
        phi1 = expm1_of(w) / w;
    return u * std::exp(b * u) * phi1;
}

} // namespace detail

/// R0(x, y | E) = int_0^inf K_t(x, y) e^{tE} dt for x != y.
inline cplx free_resolvent(const ManifoldSpec& m, const Point& x, const Point& y, cplx e,
                           const QuadratureSpec& q = default_resolvent_quadrature()) {
    detail::require_left_half_plane(e, "free_resolvent");
    if (geodesic_distance(m, x, y) == 0.0)
        throw domain_error("free_resolvent: kernel diverges on the diagonal");
    const double p = -e.real();
    const double w = e.imag();
    if (w == 0.0) return laplace_integral([&](double t) { return heat_kernel(m, x, y, t); }, p, q);
    return laplace_integral([&](double t) { return heat_kernel(m, x, y, t) * std::polar(1.0, w * t); }, p, q);
}

/// Finite diagonal difference int_0^inf K_t(a, a) (e^{t z1} - e^{t z2}) dt.
inline cplx diagonal_difference(const ManifoldSpec& m, const Point& a, cplx z1, cplx z2,
                                const QuadratureSpec& q = default_resolvent_quadrature()) {
    if (!(z1.real() < 0.0) || !(z2.real() < 0.0)) throw domain_error("diagonal_difference: Re(z) must be negative");
    if (z1 == z2) return 0.0;
    const double p = std::min(-z1.real(), -z2.real());
    return laplace_integral(
        [&](double t) { return heat_kernel(m, a, a, t) * exp_difference<cplx>(z1 + p, z2 + p, t); }, p, q);
}

/// Phi_ii(E) = int K_t(a_i,a_i)(e^{-t mu_i^2} - e^{tE}); Phi_ij(E) = -R0(a_i, a_j | E).
inline PrincipalMatrixValue principal_matrix(const ManifoldSpec& m, const CenterSet& c, cplx e,
                                             const QuadratureSpec& q = default_resolvent_quadrature()) {
    detail::require_left_half_plane(e, "principal_matrix");
    const int n = c.size();
    PrincipalMatrixValue out{e, CMatrix::Zero(n, n)};
    for (int i = 0; i < n; ++i) {
        out.phi(i, i) = diagonal_difference(m, c.positions[i], -c.mu[i] * c.mu[i], e, q);
        for (int j = i + 1; j < n; ++j) {
            const cplx r = free_resolvent(m, c.positions[i], c.positions[j], e, q);
            // the heat kernel is real and symmetric, so R0(a_j, a_i | E) = R0(a_i, a_j | E)
            out.phi(i, j) = -r;
            out.phi(j, i) = -r;
        }
    }
    return out;
}

/// Inverse with the conditioning guard: throws when sigma_min/sigma_max < 1e-12.
inline CMatrix checked_inverse(const CMatrix& phi) {
    Eigen::JacobiSVD<CMatrix> svd(phi, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || !(s(s.size() - 1) > 1e-12 * s(0)))
        throw singular_matrix_error("principal matrix is numerically singular (E at or near a bound state)");
    return svd.solve(CMatrix::Identity(phi.rows(), phi.cols()));
}

/// R(x, y | E) = R0(x, y|E) + sum_ij R0(x, a_i|E) [Phi^{-1}]_ij R0(a_j, y|E).
inline cplx resolvent_kernel(const ManifoldSpec& m, const CenterSet& c, const Point& x, const Point& y, cplx e,
                             const QuadratureSpec& q = default_resolvent_quadrature()) {
    const CMatrix inv = checked_inverse(principal_matrix(m, c, e, q).phi);
    const int n = c.size();
    CVector rx(n), ry(n);
    for (int i = 0; i < n; ++i) {
        rx(i) = free_resolvent(m, x, c.positions[i], e, q);
        ry(i) = free_resolvent(m, c.positions[i], y, e, q);
    }
    return free_resolvent(m, x, y, e, q) + (rx.transpose() * inv * ry).value();
}

/// alpha_il(E) = int_0^inf t K_t(a_i, a_l) e^{-t|E|} dt = <R0(., a_i|E), R0(., a_l|E)>.
inline double alpha(const ManifoldSpec& m, const CenterSet& c, int i, int l, double e,
                    const QuadratureSpec& q = default_resolvent_quadrature()) {
    if (!(e < 0.0)) throw domain_error("alpha: E must be negative");
    const Point& a = c.positions.at(i);
    const Point& b = c.positions.at(l);
    return laplace_integral([&](double t) { return t * heat_kernel(m, a, b, t); }, -e, q);
}

struct PhiInverseBound {
    double bound;      ///< ||D^{-1}|| / (1 - ||D^{-1}K||) when valid
    double contraction; ///< ||D^{-1}K||
    bool valid;
};

inline double operator_norm(const CMatrix& a) {
    if (a.size() == 0) return 0.0;
    Eigen::JacobiSVD<CMatrix> svd(a);
    return svd.singularValues()(0);
}

/// Geometric-series bound for ||Phi^{-1}|| from the split Phi = D - K.
inline PhiInverseBound phi_inverse_norm_bound(const PrincipalMatrixValue& v) {
    const int n = static_cast<int>(v.phi.rows());
    CMatrix dinv = CMatrix::Zero(n, n);
    CMatrix k = -v.phi;
    for (int i = 0; i < n; ++i) {
        dinv(i, i) = 1.0 / v.phi(i, i);
        k(i, i) = 0.0;
    }
    const double contraction = operator_norm(dinv * k);
    double dnorm = 0.0;
    for (int i = 0; i < n; ++i) dnorm = std::max(dnorm, std::abs(dinv(i, i)));
    if (contraction < 1.0) return {dnorm / (1.0 - contraction), contraction, true};
    return {std::numeric_limits<double>::infinity(), contraction, false};
}

// ---------------------------------------------------------------------------
// bound states

struct BoundState {
    double energy;
    CVector vector;         ///< normalized null vector of Phi(E_b)
    double residual;        ///< |eigenvalue| of Phi at the returned energy
};

struct BoundStateResult {
    std::vector<BoundState> states;
    std::vector<std::string> warnings;
};

namespace detail {

inline Eigen::VectorXd hermitian_eigenvalues(const CMatrix& phi) {
    const CMatrix h = 0.5 * (phi + phi.adjoint());
    return Eigen::SelfAdjointEigenSolver<CMatrix>(h, Eigen::EigenvaluesOnly).eigenvalues();
}

inline int count_negative(const Eigen::VectorXd& ev) {
    return static_cast<int>(std::count_if(ev.data(), ev.data() + ev.size(), [](double v) { return v < 0.0; }));
}

/// Fixes the overall phase so the largest component is real positive.
inline CVector normalize_phase(CVector v) {
    v.normalize();
    Eigen::Index k = 0;
    v.cwiseAbs().maxCoeff(&k);
    const cplx ph = v(k) / std::abs(v(k));
    return v / ph;
}

} // namespace detail

/// Roots of the eigenvalue curves of a Hermitian matrix family H(E) on [e_lo, e_hi] (e_hi < 0).
/// The scan is log-spaced in -E; sign changes are counted per eigenvalue index and
/// polished with TOMS 748.
template <class MatrixFn>
BoundStateResult eigenvalue_crossings(const MatrixFn& matrix_at, double e_lo, double e_hi, int scan_points = 48,
                                      double log_shift = 0.0) {
    if (!(e_lo < e_hi)) throw domain_error("bound_states: empty or inverted window");
    // the variable is x = log(shift - E) so windows near a positive threshold also work
    if (!(log_shift - e_hi > 0.0)) throw domain_error("bound_states: window must lie below the threshold");
    BoundStateResult out;
    std::vector<double> es(scan_points);
    const double xa = std::log(log_shift - e_hi), xb = std::log(log_shift - e_lo);
    for (int k = 0; k < scan_points; ++k) es[k] = log_shift - std::exp(xb - (xb - xa) * k / (scan_points - 1));
    es.front() = e_lo;
    es.back() = e_hi;

    std::vector<Eigen::VectorXd> evs;
    evs.reserve(es.size());
    for (double e : es) evs.push_back(detail::hermitian_eigenvalues(matrix_at(e)));

    for (int k = 0; k + 1 < scan_points; ++k) {
        const int na = detail::count_negative(evs[k]);
        const int nb = detail::count_negative(evs[k + 1]);
        if (na == nb) continue;
        if (std::abs(nb - na) > 1)
            out.warnings.push_back("several eigenvalue crossings inside one scan cell near E = " + std::to_string(es[k]));
        const int lo_idx = std::min(na, nb), hi_idx = std::max(na, nb);
        for (int j = lo_idx; j < hi_idx; ++j) {
            auto f = [&](double e) { return detail::hermitian_eigenvalues(matrix_at(e))(j); };
            double root = 0.0;
            const double fa = evs[k](j), fb = evs[k + 1](j);
            if (fa == 0.0) root = es[k];
            else if (fb == 0.0) root = es[k + 1];
            else {
                std::uintmax_t iters = 200;
                auto [r0, r1] = boost::math::tools::toms748_solve(f, es[k], es[k + 1], fa, fb,
                                                                  boost::math::tools::eps_tolerance<double>(50), iters);
                root = 0.5 * (r0 + r1);
            }
            const CMatrix h = matrix_at(root);
            Eigen::SelfAdjointEigenSolver<CMatrix> es_(0.5 * (h + h.adjoint()));
            out.states.push_back({root, detail::normalize_phase(es_.eigenvectors().col(j)), std::abs(es_.eigenvalues()(j))});
        }
    }
    std::sort(out.states.begin(), out.states.end(), [](const auto& a, const auto& b) { return a.energy < b.energy; });
    return out;
}

inline BoundStateResult bound_states(const ManifoldSpec& m, const CenterSet& c, double e_lo, double e_hi,
                                     int scan_points = 48, const QuadratureSpec& q = default_resolvent_quadrature()) {
    c.validate(m);
    if (!(e_hi < 0.0)) throw domain_error("bound_states: window must lie in (-inf, 0)");
    return eigenvalue_crossings([&](double e) { return principal_matrix(m, c, e, q).phi; }, e_lo, e_hi, scan_points);
}

// ---------------------------------------------------------------------------
// functions on compact manifolds and the resolvent acting on them
//
// A function is a band-limited part sum_sigma c_sigma f_sigma plus "atoms"
//   A(x) = int_0^inf dt K_t(x, b) sum_k c_k e^{z_k t},
// i.e. combinations of free-resolvent kernels R0(x, b | z_k). The class is
// closed under R0(E) (R0(E) maps e^{zt} to (e^{zt} - e^{Et})/(z - E)), so
// resolvent identities can be checked with exact algebra on coefficients and
// exact Gram integrals instead of grid samples.

struct ExpTerm {
    cplx coeff;
    cplx rate;
};

struct Atom {
    Point center;
    std::vector<ExpTerm> terms;
};

class SpectralFunction {
public:
    SpectralFunction() = default;
    explicit SpectralFunction(std::shared_ptr<const SpectralBasis> basis)
        : basis_(std::move(basis)), coeffs_(CVector::Zero(basis_->size())) {}
    SpectralFunction(std::shared_ptr<const SpectralBasis> basis, CVector coeffs)
        : basis_(std::move(basis)), coeffs_(std::move(coeffs)) {
        if (coeffs_.size() != basis_->size()) throw domain_error("SpectralFunction: coefficient count mismatch");
    }

    const SpectralBasis& basis() const { return *basis_; }
    const std::shared_ptr<const SpectralBasis>& basis_ptr() const { return basis_; }
    const CVector& coeffs() const { return coeffs_; }
    CVector& coeffs() { return coeffs_; }
    const std::vector<Atom>& atoms() const { return atoms_; }

    /// Adds coeff * R0(., center | rate), merging equal rates at equal centers.
    void add_atom_term(const Point& center, cplx coeff, cplx rate) {
        if (coeff == 0.0) return;
        for (Atom& a : atoms_)
            if (a.center == center) {
                for (ExpTerm& t : a.terms)
                    if (t.rate == rate) {
                        t.coeff += coeff;
                        return;
                    }
                a.terms.push_back({coeff, rate});
                return;
            }
        atoms_.push_back({center, {{coeff, rate}}});
    }

    SpectralFunction& operator+=(const SpectralFunction& o) {
        coeffs_ += o.coeffs_;
        for (const Atom& a : o.atoms_)
            for (const ExpTerm& t : a.terms) add_atom_term(a.center, t.coeff, t.rate);
        return *this;
    }
    SpectralFunction& operator*=(cplx s) {
        coeffs_ *= s;
        for (Atom& a : atoms_)
            for (ExpTerm& t : a.terms) t.coeff *= s;
        return *this;
    }
    friend SpectralFunction operator+(SpectralFunction a, const SpectralFunction& b) { return a += b; }
    friend SpectralFunction operator-(SpectralFunction a, SpectralFunction b) {
        b *= -1.0;
        return a += b;
    }
    friend SpectralFunction operator*(cplx s, SpectralFunction a) { return a *= s; }

private:
    std::shared_ptr<const SpectralBasis> basis_;
    CVector coeffs_;
    std::vector<Atom> atoms_;
};

/// Band-limited function from values of `f` projected by the manifold's L^2 grid.
template <class F>
SpectralFunction project(std::shared_ptr<const SpectralBasis> basis, const F& f, int grid_resolution = 64) {
    const QuadratureGrid g = l2_grid(basis->manifold(), grid_resolution);
    CVector c = CVector::Zero(basis->size());
    for (std::size_t k = 0; k < g.points.size(); ++k) {
        const cplx v = f(g.points[k]);
        for (int s = 0; s < basis->size(); ++s) c(s) += g.weights[k] * std::conj(basis->evaluate(s, g.points[k])) * v;
    }
    return SpectralFunction(std::move(basis), std::move(c));
}

/// Heat-kernel bump K_s(., b) truncated to the basis (exact coefficients e^{-kappa lambda s} conj f_sigma(b)).
inline SpectralFunction heat_bump(std::shared_ptr<const SpectralBasis> basis, const Point& b, double s) {
    CVector c(basis->size());
    const double kappa = basis->manifold().kappa();
    for (int k = 0; k < basis->size(); ++k) c(k) = std::exp(-kappa * basis->eigenvalue(k) * s) * std::conj(basis->evaluate(k, b));
    return SpectralFunction(std::move(basis), std::move(c));
}

class FunctionCalculus {
public:
    FunctionCalculus(const ManifoldSpec& m, const CenterSet& c, QuadratureSpec q = default_resolvent_quadrature())
        : m_(m), c_(c), q_(q) {
        if (m.manifold_class() != ManifoldClass::Compact)
            throw unsupported_error("resolvent action on functions requires a compact manifold");
        c_.validate(m_);
    }

    const ManifoldSpec& manifold() const { return m_; }
    const CenterSet& centers() const { return c_; }

    /// Pointwise value; x must not coincide with an atom center.
    cplx evaluate(const SpectralFunction& f, const Point& x) const {
        cplx v = 0.0;
        for (int s = 0; s < f.basis().size(); ++s) v += f.coeffs()(s) * f.basis().evaluate(s, x);
        for (const Atom& a : f.atoms())
            for (const ExpTerm& t : a.terms) v += t.coeff * r0(x, a.center, t.rate);
        return v;
    }

    /// (R0(E) f)(x), allowed at atom centers (the combination is finite there).
    cplx evaluate_free_resolvent(const SpectralFunction& f, cplx e, const Point& x) const {
        detail::require_left_half_plane(e, "evaluate_free_resolvent");
        const double kappa = m_.kappa();
        cplx v = 0.0;
        for (int s = 0; s < f.basis().size(); ++s)
            v += f.coeffs()(s) * f.basis().evaluate(s, x) / (kappa * f.basis().eigenvalue(s) - e);
        for (const Atom& a : f.atoms())
            for (const ExpTerm& t : a.terms) {
                if (t.rate == e) throw unsupported_error("evaluate_free_resolvent: coincident exponent");
                const cplx w = t.coeff / (t.rate - e);
                if (geodesic_distance(m_, x, a.center) == 0.0)
                    v += w * diag(a.center, t.rate, e);
                else
                    v += w * (r0(x, a.center, t.rate) - r0(x, a.center, e));
            }
        return v;
    }

    SpectralFunction apply_free_resolvent(const SpectralFunction& f, cplx e) const {
        detail::require_left_half_plane(e, "apply_free_resolvent");
        const double kappa = m_.kappa();
        SpectralFunction out(f.basis_ptr());
        for (int s = 0; s < f.basis().size(); ++s)
            out.coeffs()(s) = f.coeffs()(s) / (kappa * f.basis().eigenvalue(s) - e);
        for (const Atom& a : f.atoms())
            for (const ExpTerm& t : a.terms) {
                if (t.rate == e) throw unsupported_error("apply_free_resolvent: coincident exponent");
                const cplx w = t.coeff / (t.rate - e);
                out.add_atom_term(a.center, w, t.rate);
                out.add_atom_term(a.center, -w, e);
            }
        return out;
    }

    /// Coefficients Phi^{-1}(E) (R0(E) f)(a_j) of the interaction atoms.
    CVector interaction_coefficients(const SpectralFunction& f, cplx e) const {
        const int n = c_.size();
        CVector v(n);
        for (int j = 0; j < n; ++j) v(j) = evaluate_free_resolvent(f, e, c_.positions[j]);
        return inverse_phi(e) * v;
    }

    /// R(E) f = R0(E) f + sum_i R0(., a_i|E) [Phi^{-1} (R0(E)f)(a)]_i.
    SpectralFunction apply_resolvent(const SpectralFunction& f, cplx e) const {
        SpectralFunction out = apply_free_resolvent(f, e);
        const CVector coef = interaction_coefficients(f, e);
        for (int i = 0; i < c_.size(); ++i) out.add_atom_term(c_.positions[i], coef(i), e);
        return out;
    }

    cplx inner(const SpectralFunction& f, const SpectralFunction& g) const {
        cplx s = f.coeffs().dot(g.coeffs()); // conjugates the first argument
        for (const Atom& a : g.atoms()) s += spectral_atom(f, a);
        for (const Atom& a : f.atoms()) s += std::conj(spectral_atom(g, a));
        for (const Atom& a : f.atoms())
            for (const Atom& b : g.atoms()) s += atom_atom(a, b);
        return s;
    }

    double norm(const SpectralFunction& f) const { return std::sqrt(std::max(0.0, inner(f, f).real())); }

    CMatrix inverse_phi(cplx e) const {
        auto it = phi_inv_cache_.find(key(e));
        if (it != phi_inv_cache_.end()) return it->second;
        CMatrix inv = checked_inverse(principal_matrix(m_, c_, e, q_).phi);
        phi_inv_cache_.emplace(key(e), inv);
        return inv;
    }

private:
    using Key = std::pair<double, double>;
    static Key key(cplx z) { return {z.real(), z.imag()}; }

    cplx r0(const Point& x, const Point& y, cplx z) const {
        return free_resolvent(m_, x, y, z, q_);
    }
    cplx diag(const Point& a, cplx z1, cplx z2) const { return diagonal_difference(m_, a, z1, z2, q_); }

    /// <f, A> for the band-limited part of f: sum_s conj(c_s) conj(f_s(b)) sum_k c_k / (kappa lambda_s - z_k)
    cplx spectral_atom(const SpectralFunction& f, const Atom& a) const {
        const double kappa = m_.kappa();
        cplx s = 0.0;
        for (int k = 0; k < f.basis().size(); ++k) {
            if (f.coeffs()(k) == 0.0) continue;
            cplx prof = 0.0;
            for (const ExpTerm& t : a.terms) prof += t.coeff / (kappa * f.basis().eigenvalue(k) - t.rate);
            s += std::conj(f.coeffs()(k)) * std::conj(f.basis().evaluate(k, a.center)) * prof;
        }
        return s;
    }

    /// <A, B> = sum conj(c_k) c_l int du K_u(a, b) (e^{u conj z_k} - e^{u z_l}) / (conj z_k - z_l)
    cplx atom_atom(const Atom& a, const Atom& b) const {
        cplx s = 0.0;
        for (const ExpTerm& ta : a.terms)
            for (const ExpTerm& tb : b.terms) {
                if (ta.coeff == 0.0 || tb.coeff == 0.0) continue;
                s += std::conj(ta.coeff) * tb.coeff * gram(a.center, b.center, std::conj(ta.rate), tb.rate);
            }
        return s;
    }

    cplx gram(const Point& a, const Point& b, cplx z1, cplx z2) const {
        const auto k = std::make_tuple(a.c, b.c, z1.real(), z1.imag(), z2.real(), z2.imag());
        auto it = gram_cache_.find(k);
        if (it != gram_cache_.end()) return it->second;
        const double p = std::min(-z1.real(), -z2.real());
        const cplx v = laplace_integral(
            [&](double u) { return heat_kernel(m_, a, b, u) * detail::exp_divided_difference(z1 + p, z2 + p, u); }, p,
            q_);
        gram_cache_.emplace(k, v);
        return v;
    }

    ManifoldSpec m_;
    CenterSet c_;
    QuadratureSpec q_;
    mutable std::map<Key, CMatrix> phi_inv_cache_;
    mutable std::map<std::tuple<std::array<double, 3>, std::array<double, 3>, double, double, double, double>, cplx>
        gram_cache_;
};

} // namespace renorm
