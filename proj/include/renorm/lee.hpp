#pragma once

// Non-relativistic Lee model on compact manifolds, restricted to a truncated
// bosonic Fock space built on the first M Laplace eigenmodes.
//
//   Phi(E) = (H0 - E + mu) + lambda^2 S1(E) - lambda^2 S2(E)
//   S1 = int dt K_t(a,a) [e^{-t(m-mu)} - e^{-t(H0+m-E)}]           (diagonal in H0)
//   <b|S2|g> = sum_{s,t} conj f_s(a) f_t(a) <b|a+_s a_t|g> / (E_g + eps_s - E)
//
// with boson energies eps_s = kappa lambda_s + m, kappa = 1/(2m).

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "renorm/errors.hpp"
#include "renorm/manifold.hpp"
#include "renorm/pointinteraction.hpp"
#include "renorm/report.hpp"
#include "renorm/specialfn.hpp"

namespace renorm {

class LeeModelSpec {
public:
    LeeModelSpec(const ManifoldSpec& manifold, Point center, double coupling, double mass, double mu)
        : manifold_(manifold.with_kappa(0.5 / mass)), center_(center), coupling_(coupling), mass_(mass), mu_(mu) {
        if (!(mass > 0.0)) throw domain_error("LeeModelSpec: boson mass must be positive");
        if (!(coupling > 0.0)) throw domain_error("LeeModelSpec: coupling must be positive");
        if (!(mu < mass)) throw domain_error("LeeModelSpec: mu must lie below the boson mass");
    }

    const ManifoldSpec& manifold() const { return manifold_; }
    const Point& center() const { return center_; }
    double coupling() const { return coupling_; }
    double mass() const { return mass_; }
    double mu() const { return mu_; }
    double kappa() const { return manifold_.kappa(); }
    double boson_energy(double lambda) const { return kappa() * lambda + mass_; }
    double threshold(int n) const { return n * mass_ + mu_; }
    LeeModelSpec with_coupling(double coupling) const { return {manifold_, center_, coupling, mass_, mu_}; }

private:
    ManifoldSpec manifold_;
    Point center_;
    double coupling_, mass_, mu_;
};

// ---------------------------------------------------------------------------
// Fock basis

/// Occupation states with at most n_max bosons in M modes, graded lexicographic order.
/// A state is stored as its ascending multiset of mode indices.
class FockBasis {
public:
    FockBasis(int modes, int n_max) : modes_(modes), n_max_(n_max) {
        if (modes < 1) throw domain_error("FockBasis: need at least one mode");
        if (n_max < 0) throw domain_error("FockBasis: n_max must be non-negative");
        for (int n = 0; n <= n_max; ++n) {
            const int first = static_cast<int>(states_.size());
            std::vector<int> cur(n, 0);
            enumerate(cur, 0, 0);
            sectors_.push_back({first, static_cast<int>(states_.size())});
        }
        for (int i = 0; i < size(); ++i) index_[states_[i]] = i;
    }

    static long long expected_size(int modes, int n_max) {
        long long total = 0;
        for (int k = 0; k <= n_max; ++k) {
            // C(M + k - 1, k)
            long double c = 1;
            for (int j = 1; j <= k; ++j) c = c * (modes + j - 1) / j;
            total += static_cast<long long>(std::llround(c));
        }
        return total;
    }

    int modes() const { return modes_; }
    int n_max() const { return n_max_; }
    int size() const { return static_cast<int>(states_.size()); }
    const std::vector<int>& state(int i) const { return states_[i]; }
    int bosons(int i) const { return static_cast<int>(states_[i].size()); }

    std::vector<int> occupations(int i) const {
        std::vector<int> occ(modes_, 0);
        for (int s : states_[i]) ++occ[s];
        return occ;
    }

    /// Global indices [first, last) of the n-boson sector.
    std::pair<int, int> sector(int n) const {
        if (n < 0 || n > n_max_) throw domain_error("FockBasis: sector outside 0..n_max");
        return sectors_[n];
    }

    int index_of(const std::vector<int>& multiset) const {
        auto it = index_.find(multiset);
        return it == index_.end() ? -1 : it->second;
    }

private:
    void enumerate(std::vector<int>& cur, int pos, int start) {
        if (pos == static_cast<int>(cur.size())) {
            states_.push_back(cur);
            return;
        }
        for (int s = start; s < modes_; ++s) {
            cur[pos] = s;
            enumerate(cur, pos + 1, s);
        }
    }

    int modes_, n_max_;
    std::vector<std::vector<int>> states_;
    std::vector<std::pair<int, int>> sectors_;
    std::map<std::vector<int>, int> index_;
};

/// Diagonal of H0: sum of boson energies kappa lambda_s + m over occupied modes.
inline Eigen::VectorXd build_h0(const LeeModelSpec& spec, const SpectralBasis& basis, const FockBasis& fock) {
    if (fock.modes() > basis.size()) throw domain_error("build_h0: Fock basis uses more modes than the spectral basis");
    Eigen::VectorXd h(fock.size());
    for (int i = 0; i < fock.size(); ++i) {
        double lam = 0.0;
        for (int s : fock.state(i)) lam += basis.eigenvalue(s);
        h(i) = fock.bosons(i) * spec.mass() + spec.kappa() * lam;
    }
    return h;
}

/// int dt K_t(a,a) [e^{-t(m-mu)} - e^{-t(h+m-E)}] for an H0 eigenvalue h.
inline cplx lee_s1(const LeeModelSpec& spec, double h, cplx e, const QuadratureSpec& q = {}) {
    const double rate = spec.mass() - spec.mu();
    const cplx gap = h - e + spec.mu();
    const Point& a = spec.center();
    return laplace_integral(
        [&](double t) { return heat_kernel(spec.manifold(), a, a, t) * (-expm1_of(cplx(-gap * t))); }, rate, q);
}

/// Vacuum-sector scalar Phi(E) = -E + mu + lambda^2 S1(0, E); any geometry.
inline cplx lee_vacuum_phi(const LeeModelSpec& spec, cplx e, const QuadratureSpec& q = {}) {
    if (!(e.real() < spec.threshold(0))) throw domain_error("lee_vacuum_phi: Re(E) must lie below mu");
    return -e + spec.mu() + spec.coupling() * spec.coupling() * lee_s1(spec, 0.0, e, q);
}

struct LeeSplit {
    Eigen::VectorXd k;  ///< H0 - E + mu (diagonal)
    CMatrix u1;         ///< -lambda^2 S1 (diagonal)
    CMatrix u2;         ///< lambda^2 S2
    CMatrix phi() const { return CMatrix(k.cast<cplx>().asDiagonal()) - u1 - u2; }
};

/// Principal operator restricted to the n-boson sector of a Fock basis.
class LeePrincipalOperator {
public:
    LeePrincipalOperator(LeeModelSpec spec, const SpectralBasis& basis, const FockBasis& fock, int n,
                         QuadratureSpec q = {})
        : spec_(std::move(spec)), n_(n), q_(q) {
        if (spec_.manifold().manifold_class() != ManifoldClass::Compact)
            throw unsupported_error("Lee model: a discrete spectral basis needs a compact manifold");
        const auto [first, last] = fock.sector(n);
        first_ = first;
        dim_ = last - first;
        const Eigen::VectorXd h0 = build_h0(spec_, basis, fock);
        h_ = h0.segment(first, dim_);
        std::vector<cplx> f(fock.modes());
        eps_.resize(fock.modes());
        for (int s = 0; s < fock.modes(); ++s) {
            f[s] = basis.evaluate(s, spec_.center());
            eps_[s] = spec_.boson_energy(basis.eigenvalue(s));
        }
        // a+_s a_t |g>: remove one t, insert one s
        for (int g = first; g < last; ++g) {
            const auto occ = fock.occupations(g);
            const auto& st = fock.state(g);
            for (std::size_t p = 0; p < st.size(); ++p) {
                const int t = st[p];
                if (p > 0 && st[p - 1] == t) continue;
                std::vector<int> reduced = st;
                reduced.erase(reduced.begin() + static_cast<long>(p));
                for (int s = 0; s < fock.modes(); ++s) {
                    std::vector<int> b = reduced;
                    b.insert(std::upper_bound(b.begin(), b.end(), s), s);
                    const int bi = fock.index_of(b);
                    const int occ_s_after = (s == t ? occ[s] : occ[s] + 1);
                    const double amp = std::sqrt(static_cast<double>(occ[t]) * occ_s_after);
                    hops_.push_back({bi - first, g - first, std::conj(f[s]) * f[t] * amp, h0(g) + eps_[s]});
                }
            }
        }
    }

    const LeeModelSpec& spec() const { return spec_; }
    int sector() const { return n_; }
    int dimension() const { return dim_; }
    double threshold() const { return spec_.threshold(n_); }
    const Eigen::VectorXd& h0() const { return h_; }

    void require_window(cplx e) const {
        if (!(e.real() < threshold()))
            throw domain_error("Lee principal operator: Re(E) must lie below n m + mu = " + std::to_string(threshold()));
    }

    CMatrix s1(cplx e) const {
        require_window(e);
        std::map<double, cplx> cache;
        CMatrix out = CMatrix::Zero(dim_, dim_);
        for (int i = 0; i < dim_; ++i) {
            auto it = cache.find(h_(i));
            if (it == cache.end()) it = cache.emplace(h_(i), lee_s1(spec_, h_(i), e, q_)).first;
            out(i, i) = it->second;
        }
        return out;
    }

    CMatrix s2(cplx e) const {
        require_window(e);
        CMatrix out = CMatrix::Zero(dim_, dim_);
        for (const auto& hp : hops_) out(hp.row, hp.col) += hp.amplitude / (hp.energy - e);
        return out;
    }

    /// Real E only: K, U1, U2 with Phi = K - U1 - U2.
    LeeSplit split(double e) const {
        const double l2 = spec_.coupling() * spec_.coupling();
        LeeSplit out;
        out.k = h_.array() - e + spec_.mu();
        if (out.k.minCoeff() <= 0.0)
            throw domain_error("Lee principal operator: K(E) is not positive definite (convention error)");
        out.u1 = -l2 * s1(e);
        out.u2 = l2 * s2(e);
        return out;
    }

    CMatrix phi(cplx e) const {
        const double l2 = spec_.coupling() * spec_.coupling();
        CMatrix out = l2 * (s1(e) - s2(e));
        for (int i = 0; i < dim_; ++i) out(i, i) += h_(i) - e + spec_.mu();
        return out;
    }

    /// ||K^{-1/2} X K^{-1/2}|| for X = U1 or U2.
    double tilde_norm(const CMatrix& x, const Eigen::VectorXd& k) const {
        const Eigen::VectorXd r = k.cwiseSqrt().cwiseInverse();
        const CMatrix t = r.cast<cplx>().asDiagonal() * x * r.cast<cplx>().asDiagonal();
        return detail::hermitian_eigenvalues(t).cwiseAbs().maxCoeff();
    }

    double u2_tilde_norm(double e) const {
        const LeeSplit s = split(e);
        return tilde_norm(s.u2, s.k);
    }

    double u1_tilde_norm(double e) const {
        const LeeSplit s = split(e);
        return tilde_norm(s.u1, s.k);
    }

    /// ||U2(E) H0^{-1}||, n >= 1.
    double relative_bound(double e) const {
        if (n_ < 1) throw domain_error("relative_bound: needs a sector with at least one boson");
        const LeeSplit s = split(e);
        const CMatrix m = s.u2 * h_.cwiseInverse().cast<cplx>().asDiagonal();
        return Eigen::JacobiSVD<CMatrix>(m).singularValues()(0);
    }

private:
    struct Hop {
        int row, col;
        cplx amplitude;
        double energy; ///< E_g + eps_s
    };
    LeeModelSpec spec_;
    int n_;
    QuadratureSpec q_;
    int first_ = 0, dim_ = 0;
    Eigen::VectorXd h_;
    std::vector<double> eps_;
    std::vector<Hop> hops_;
};

// ---------------------------------------------------------------------------
// ground state

struct LeeGroundState {
    bool found = false;
    double energy = 0.0;
    double residual = 0.0;         ///< |min eigenvalue of Phi| at the root
    double energy_half_modes = 0.0;
    double energy_lower_nmax = 0.0;
    double truncation_estimate = 0.0; ///< max shift under the coarser truncations
    std::vector<std::string> warnings;
};

inline std::optional<BoundState> lee_lowest_crossing(const LeePrincipalOperator& op, double e_lo, double e_hi,
                                                     int scan_points) {
    if (!(e_hi < op.threshold())) throw domain_error("ground_state_energy: window must lie below n m + mu");
    const auto r = eigenvalue_crossings([&](double e) { return op.phi(e); }, e_lo, e_hi, scan_points, op.threshold());
    if (r.states.empty()) return std::nullopt;
    return r.states.front();
}

/// Lowest zero of min-eig Phi(E) on the n-boson sector, with truncation estimates
/// from M/2 modes and n_max - 1 bosons.
inline LeeGroundState ground_state_energy(const LeeModelSpec& spec, const SpectralBasis& basis, int modes, int n_max,
                                          int n, double e_lo, double e_hi, int scan_points = 32) {
    LeeGroundState out;
    auto solve = [&](int mm, int nm) -> std::optional<BoundState> {
        const FockBasis fock(mm, nm);
        const LeePrincipalOperator op(spec, basis, fock, n);
        return lee_lowest_crossing(op, e_lo, e_hi, scan_points);
    };
    const auto main = solve(modes, n_max);
    if (!main) {
        out.warnings.push_back("Phi(E) has no zero crossing on the window");
        return out;
    }
    out.found = true;
    out.energy = main->energy;
    out.residual = main->residual;
    out.energy_half_modes = out.energy_lower_nmax = out.energy;
    if (modes / 2 >= 1) {
        if (const auto half = solve(modes / 2, n_max)) out.energy_half_modes = half->energy;
        else out.warnings.push_back("no crossing with half the modes");
    }
    if (n_max - 1 >= n) {
        if (const auto lower = solve(modes, n_max - 1)) out.energy_lower_nmax = lower->energy;
        else out.warnings.push_back("no crossing with n_max - 1");
    }
    out.truncation_estimate =
        std::max(std::abs(out.energy - out.energy_half_modes), std::abs(out.energy - out.energy_lower_nmax));
    return out;
}

// ---------------------------------------------------------------------------
// lower bounds

struct LeeLowerBound {
    double value;
    double constant; ///< C32 (compact) or C31 (Cartan-Hadamard)
    double exponent; ///< 1 / (2 - D/2)
    std::string provenance;
};

/// Compact: n m + mu - (n lambda^2 C32)^{1/(2-D/2)}; Cartan-Hadamard: n m + mu - (n C31 lambda^2 m^{D/2})^{1/(2-D/2)}.
/// A' (and C30) come from the heat-kernel prefactor in the kappa = 1/(2m) normalisation: A' = C2 2^{D/2}.
inline LeeLowerBound ground_state_lower_bound(int dim, int n, double coupling, double mass, double mu,
                                              const ManifoldSpec& manifold, const ConstantsRegistry& registry) {
    if (dim != 2 && dim != 3) throw domain_error("ground_state_lower_bound: D must be 2 or 3");
    if (n < 0) throw domain_error("ground_state_lower_bound: n must be non-negative");
    const HeatBoundConstants& c = registry.at(manifold);
    const double d = dim;
    const double expo = 1.0 / (2.0 - 0.5 * d);
    const double pref = std::tgamma(2.0) / std::pow(std::tgamma(0.5), 2);
    const double g1 = std::tgamma(1.0 - 0.25 * d), g2 = std::tgamma(2.0 - 0.5 * d);
    const double g32 = std::tgamma(1.5 - 0.25 * d), g24 = std::tgamma(2.0 - 0.25 * d);
    const double pi = std::numbers::pi;
    LeeLowerBound out{};
    out.exponent = expo;
    out.provenance = c.provenance == "exact" ? "exact" : "calibrated";
    if (manifold.manifold_class() == ManifoldClass::Compact) {
        if (!(mu > 0.0)) throw domain_error("ground_state_lower_bound: the compact bound needs mu > 0");
        const double ap = c.c2 * std::pow(2.0, 0.5 * d);
        const double v = manifold.volume();
        const double bracket = 4.0 / (v * std::pow(mu, 0.5 * d)) +
                               4.0 * std::sqrt(ap) * std::pow(mass, 0.25 * d) * std::sqrt(pi) * g24 * g1 /
                                   (std::pow(mu, 0.25 * d) * std::sqrt(v) * g32) +
                               ap * std::pow(mass, 0.5 * d) * pi * g2 * g1 * g1 / (g32 * g32);
        out.constant = pref * bracket;
        out.value = n * mass + mu - std::pow(n * coupling * coupling * out.constant, expo);
    } else {
        const double c30 = c.c4 * std::pow(2.0, 0.5 * d);
        out.constant = c30 * pi * std::tgamma(2.0) * g1 * g1 * g2 / (std::pow(std::tgamma(0.5), 2) * g32 * g32);
        out.value = n * mass + mu - std::pow(n * out.constant * coupling * coupling * std::pow(mass, 0.5 * d), expo);
    }
    return out;
}

// ---------------------------------------------------------------------------
// bound checks

/// ||K^{-1/2} U1 K^{-1/2}|| over E = -|E|: asserts U1 <= 0 and a decay exponent of at least 1/2.
inline BoundReport u1_tilde_bound_check(const LeePrincipalOperator& op, const std::vector<double>& abs_energies) {
    BoundReport r;
    r.check = "lee-u1-tilde";
    r.model = "lee";
    r.geometry = to_string(op.spec().manifold().kind());
    r.sweep_variable = "|E|";
    r.grid = abs_energies;
    r.bound_provenance = "calibrated";
    const auto& s = op.spec();
    const double l2 = s.coupling() * s.coupling();
    std::vector<double> vals;
    bool negative = true;
    for (double a : abs_energies) {
        const LeeSplit sp = op.split(-a);
        const double top = detail::hermitian_eigenvalues(sp.u1).maxCoeff();
        if (top > 1e-12) negative = false;
        const double v = op.tilde_norm(sp.u1, sp.k);
        vals.push_back(v);
        r.values.push_back({v, 1e-9 * v});
    }
    // C lambda^2 / (sqrt(m - mu) |E|^{1/2}) with C fitted to dominate the sweep
    double c46 = 0.0;
    for (std::size_t k = 0; k < vals.size(); ++k)
        c46 = std::max(c46, vals[k] * std::sqrt(s.mass() - s.mu()) * std::sqrt(abs_energies[k]) / l2);
    c46 *= 1.05;
    for (double a : abs_energies) r.bound.push_back({c46 * l2 / (std::sqrt(s.mass() - s.mu()) * std::sqrt(a)), 0.0});
    r.exponent_fit = fit_loglog(abs_energies, vals);
    r.expected_exponent = -0.5;
    r.notes.push_back("asserted: slope <= -1/2 within fit error; U1 negative semidefinite");
    if (!negative) {
        r.verdict = Verdict::violated;
        r.notes.push_back("U1 has a positive eigenvalue");
    } else if (r.exponent_fit->slope > -0.5 + r.exponent_fit->error + 1e-3 || bound_violated(r)) {
        r.verdict = Verdict::violated;
    } else {
        r.verdict = Verdict::holds_with_calibration;
    }
    return r;
}

/// ||U2(E) H0^{-1}|| on E <= mu - 1e-3 m for two sectors: bounded as E -> -inf, sector ratio within a factor 3.
inline BoundReport relative_bound_check(const LeePrincipalOperator& op1, const LeePrincipalOperator& op2,
                                        const std::vector<double>& energies) {
    BoundReport r;
    r.check = "lee-relative-bound";
    r.model = "lee";
    r.geometry = to_string(op1.spec().manifold().kind());
    r.sweep_variable = "E";
    r.grid = energies;
    r.bound_provenance = "calibrated";
    const double cap = op1.spec().mu() - 1e-3 * op1.spec().mass();
    double sup = 0.0;
    std::vector<double> v1;
    bool ratio_ok = true;
    for (double e : energies) {
        if (e > cap) throw domain_error("relative_bound_check: energies must satisfy E <= mu - 1e-3 m");
        const double a = op1.relative_bound(e), b = op2.relative_bound(e);
        v1.push_back(a);
        r.values.push_back({a, 1e-9 * a});
        sup = std::max(sup, a);
        const double ratio = b / a;
        if (!(ratio >= 1.0 / 3.0 && ratio <= 3.0)) ratio_ok = false;
    }
    for (std::size_t k = 0; k < energies.size(); ++k) r.bound.push_back({1.05 * sup, 0.0});
    // boundedness toward -inf: no growth between the two most negative energies
    std::vector<std::size_t> order(energies.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return energies[a] < energies[b]; });
    const bool bounded = order.size() < 2 || v1[order[0]] <= v1[order[1]] * (1.0 + 1e-9);
    r.notes.push_back("sector ratio check " + std::string(ratio_ok ? "passed" : "failed"));
    r.verdict = (!ratio_ok || !bounded || bound_violated(r)) ? Verdict::violated : Verdict::holds_with_calibration;
    return r;
}

} // namespace renorm
