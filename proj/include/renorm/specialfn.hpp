#pragma once

// Special functions and quadrature engines shared by every model.
//
// All integrals over the semi-infinite time axis go through laplace_integral():
// an adaptive Gauss-Legendre pass over [0, T] in the variable tau = sqrt(t)
// (absorbs t^{-1/2} endpoint behaviour) followed by a Gauss-Laguerre tail on
// [T, inf) weighted by exp(-p t).

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <algorithm>
#include <string>
#include <type_traits>
#include <vector>

#include <Eigen/Dense>

#include "renorm/errors.hpp"

namespace renorm {

using cplx = std::complex<double>;

struct QuadratureSpec {
    int node_count = 64;               ///< Gauss-Legendre nodes per panel, Laguerre nodes in the tail
    double relative_tolerance = 1e-10;
    int max_refinements = 2000;        ///< panel bisections before giving up
    double split_point = 24.0;         ///< tail starts at t = split_point / decay_rate

    void validate() const {
        if (node_count < 8) throw domain_error("QuadratureSpec: node_count must be >= 8");
        if (!(relative_tolerance > 0.0 && relative_tolerance <= 1e-3))
            throw domain_error("QuadratureSpec: relative_tolerance must lie in (0, 1e-3]");
        if (max_refinements < 1) throw domain_error("QuadratureSpec: max_refinements must be positive");
        if (!(split_point > 0.0)) throw domain_error("QuadratureSpec: split_point must be positive");
    }

    static QuadratureSpec two_dimensional() {
        QuadratureSpec q;
        q.node_count = 48;
        return q;
    }
};

// ---------------------------------------------------------------------------
// elementary helpers

inline double abs_value(double v) { return std::abs(v); }
inline double abs_value(const cplx& v) { return std::abs(v); }

/// exp(z) - 1 without cancellation for small |z|.
inline double expm1_of(double z) { return std::expm1(z); }
inline cplx expm1_of(const cplx& z) {
    const double a = z.real(), b = z.imag();
    const double s = std::sin(0.5 * b);
    // exp(a)(cos b + i sin b) - 1 = expm1(a) cos b + (cos b - 1) + i exp(a) sin b
    return {std::expm1(a) * std::cos(b) - 2.0 * s * s, std::exp(a) * std::sin(b)};
}

/// exp(z1 t) - exp(z2 t), stable when the exponents are close or t is small.
template <class Z>
Z exp_difference(const Z& z1, const Z& z2, double t) {
    const Z w = (z2 - z1) * t;
    if (std::abs(w) > 0.5) return std::exp(z1 * t) - std::exp(z2 * t);
    return std::exp(z1 * t) * (-expm1_of(w));
}

// ---------------------------------------------------------------------------
// Bessel K

/// K_nu(x) for nu in {0, 1/2, 1, 3/2}. Half-integer orders use closed forms.
inline double bessel_k(double nu, double x) {
    if (!(x > 0.0)) throw domain_error("bessel_k: argument must be positive");
    if (x > 705.0) return 0.0;
    if (nu == 0.5 || nu == -0.5) return std::sqrt(std::numbers::pi / (2.0 * x)) * std::exp(-x);
    if (nu == 1.5 || nu == -1.5)
        return std::sqrt(std::numbers::pi / (2.0 * x)) * std::exp(-x) * (1.0 + 1.0 / x);
    if (nu == 0.0 || nu == 1.0) return std::cyl_bessel_k(nu, x);
    throw domain_error("bessel_k: unsupported order " + std::to_string(nu));
}

// ---------------------------------------------------------------------------
// curvature-normalised sine

/// sin(sqrt(K) r)/sqrt(K), r, or sinh(sqrt(-K) r)/sqrt(-K) for K >0, =0, <0.
inline double sn(double curvature, double r) {
    if (r < 0.0) throw domain_error("sn: radius must be non-negative");
    if (curvature > 0.0) {
        const double s = std::sqrt(curvature);
        if (r > std::numbers::pi / s * (1.0 + 1e-14)) throw domain_error("sn: radius beyond pi/sqrt(K)");
    }
    const double x = curvature * r * r;
    if (std::abs(x) < 1e-6) {
        // r (1 - x/6 + x^2/120 - x^3/5040) keeps continuity through K = 0
        return r * (1.0 - x / 6.0 + x * x / 120.0 - x * x * x / 5040.0);
    }
    if (curvature > 0.0) {
        const double s = std::sqrt(curvature);
        return std::sin(s * r) / s;
    }
    const double s = std::sqrt(-curvature);
    return std::sinh(s * r) / s;
}

// ---------------------------------------------------------------------------
// Gauss rules

struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

namespace detail {

inline GaussRule make_gauss_legendre(int n) {
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

// Golub-Welsch on the Laguerre Jacobi matrix (alpha_k = 2k+1, beta_k = k).
inline GaussRule make_gauss_laguerre(int n) {
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        jac(k, k) = 2.0 * k + 1.0;
        if (k + 1 < n) {
            jac(k, k + 1) = k + 1.0;
            jac(k + 1, k) = k + 1.0;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jac);
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int k = 0; k < n; ++k) {
        rule.nodes[k] = es.eigenvalues()(k);
        const double v = es.eigenvectors()(0, k);
        rule.weights[k] = v * v;
    }
    return rule;
}

template <class Maker>
const GaussRule& cached_rule(int n, Maker make, std::map<int, std::unique_ptr<GaussRule>>& cache,
                             std::mutex& mtx) {
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, std::make_unique<GaussRule>(make(n))).first;
    return *it->second;
}

} // namespace detail

/// Gauss-Legendre rule on [-1, 1]. Rules are built once per size and never mutated afterwards.
inline const GaussRule& gauss_legendre(int n) {
    static std::map<int, std::unique_ptr<GaussRule>> cache;
    static std::mutex mtx;
    return detail::cached_rule(n, detail::make_gauss_legendre, cache, mtx);
}

/// Gauss-Laguerre rule for weight exp(-x) on [0, inf).
inline const GaussRule& gauss_laguerre(int n) {
    static std::map<int, std::unique_ptr<GaussRule>> cache;
    static std::mutex mtx;
    return detail::cached_rule(n, detail::make_gauss_laguerre, cache, mtx);
}

// ---------------------------------------------------------------------------
// adaptive finite-interval quadrature

template <class V>
struct IntegralResult {
    V value{};
    double error = 0.0;
    int evaluations = 0;
};

namespace detail {

template <class F>
auto gauss_panel(const F& f, double a, double b, const GaussRule& rule, double& l1)
    -> std::invoke_result_t<const F&, double> {
    using V = std::invoke_result_t<const F&, double>;
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    V sum{};
    double s1 = 0.0;
    for (std::size_t k = 0; k < rule.nodes.size(); ++k) {
        const V v = f(mid + half * rule.nodes[k]);
        sum += rule.weights[k] * v;
        s1 += rule.weights[k] * abs_value(v);
    }
    l1 = s1 * std::abs(half);
    return sum * half;
}

} // namespace detail

/// Globally adaptive Gauss-Legendre quadrature of f over [a, b].
///
/// A panel's error is |G(panel) - G(left) - G(right)|; the worst panel is bisected
/// until the summed error is below tol * max(|I|, 1e-2 * int |f|).
template <class F>
auto integrate_adaptive(const F& f, const std::vector<double>& breaks, const QuadratureSpec& spec)
    -> IntegralResult<std::invoke_result_t<const F&, double>> {
    using V = std::invoke_result_t<const F&, double>;
    IntegralResult<V> out;
    if (breaks.size() < 2) return out;
    const double a = breaks.front(), b = breaks.back();
    if (a == b) return out;
    const GaussRule& rule = gauss_legendre(spec.node_count);
    const int n = spec.node_count;

    struct Panel {
        double a, b;
        V left, right;
        double l1;
        double err;
    };
    auto make_panel = [&](double pa, double pb, const V& whole) {
        const double m = 0.5 * (pa + pb);
        double l1a = 0.0, l1b = 0.0;
        const V left = detail::gauss_panel(f, pa, m, rule, l1a);
        const V right = detail::gauss_panel(f, m, pb, rule, l1b);
        out.evaluations += 2 * n;
        return Panel{pa, pb, left, right, l1a + l1b, abs_value(whole - left - right)};
    };
    auto cmp = [](const Panel& x, const Panel& y) { return x.err < y.err; };
    std::vector<Panel> heap;

    V total{};
    double total_err = 0.0;
    double total_l1 = 0.0;
    for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
        if (breaks[k] == breaks[k + 1]) continue;
        double l1_whole = 0.0;
        const V whole = detail::gauss_panel(f, breaks[k], breaks[k + 1], rule, l1_whole);
        out.evaluations += n;
        Panel first = make_panel(breaks[k], breaks[k + 1], whole);
        total += first.left + first.right;
        total_err += first.err;
        total_l1 += first.l1;
        heap.push_back(first);
    }
    std::make_heap(heap.begin(), heap.end(), cmp);
    // incremental updates drift once the error shrinks by many orders; recompute exactly
    auto resum_totals = [&] {
        total = V{};
        total_err = 0.0;
        total_l1 = 0.0;
        for (const Panel& p : heap) {
            total += p.left + p.right;
            total_err += p.err;
            total_l1 += p.l1;
        }
    };

    int refinements = 0;
    auto converged = [&] {
        const double scale = std::max(abs_value(total), 1e-2 * total_l1);
        return total_err <= spec.relative_tolerance * scale;
    };
    while (!converged()) {
        if (refinements % 64 == 63) {
            resum_totals();
            if (converged()) break;
        }
        if (refinements >= spec.max_refinements) {
            char msg[160];
            std::snprintf(msg, sizeof msg, "integrate_adaptive: no convergence on [%.6g, %.6g], error estimate %.3g",
                          a, b, total_err);
            throw convergence_error(msg);
        }
        std::pop_heap(heap.begin(), heap.end(), cmp);
        Panel worst = heap.back();
        heap.pop_back();
        const double m = 0.5 * (worst.a + worst.b);
        Panel lp = make_panel(worst.a, m, worst.left);
        Panel rp = make_panel(m, worst.b, worst.right);
        total += (lp.left + lp.right + rp.left + rp.right) - (worst.left + worst.right);
        total_err += lp.err + rp.err - worst.err;
        total_l1 += lp.l1 + rp.l1 - worst.l1;
        heap.push_back(lp);
        std::push_heap(heap.begin(), heap.end(), cmp);
        heap.push_back(rp);
        std::push_heap(heap.begin(), heap.end(), cmp);
        ++refinements;
        if (total_err < 0.0) total_err = 0.0;
    }
    resum_totals();
    out.value = total;
    out.error = total_err;
    return out;
}

template <class F>
auto integrate_adaptive(const F& f, double a, double b, const QuadratureSpec& spec)
    -> IntegralResult<std::invoke_result_t<const F&, double>> {
    return integrate_adaptive(f, std::vector<double>{a, b}, spec);
}

/// Break points a, a + (b-a)/4^levels, ..., a + (b-a)/4, b: grades panels toward a.
inline std::vector<double> graded_breaks(double a, double b, int levels) {
    std::vector<double> br{a};
    for (int k = levels; k >= 1; --k) br.push_back(a + (b - a) * std::pow(0.25, k));
    br.push_back(b);
    return br;
}

// ---------------------------------------------------------------------------
// semi-infinite Laplace-type integrals

/// Integral of f(t) exp(-decay_rate t) over t in (0, inf).
///
/// f may be real or complex valued. It is never evaluated at t = 0, so integrands
/// with removable or integrable endpoint behaviour (Frullani differences,
/// t^{-1/2}) are passed as-is.
template <class F>
auto laplace_integral(const F& f, double decay_rate, const QuadratureSpec& spec = {})
    -> std::invoke_result_t<const F&, double> {
    using V = std::invoke_result_t<const F&, double>;
    spec.validate();
    if (!(decay_rate > 0.0)) throw domain_error("laplace_integral: decay_rate must be positive");

    double t_split = spec.split_point / decay_rate;
    auto head = [&](double tau) {
        const double t = tau * tau;
        return (2.0 * tau * std::exp(-decay_rate * t)) * f(t);
    };
    const GaussRule& lag = gauss_laguerre(spec.node_count);
    const GaussRule& lag_half = gauss_laguerre(spec.node_count / 2);
    auto tail = [&](const GaussRule& rule, double start) {
        V sum{};
        for (std::size_t k = 0; k < rule.nodes.size(); ++k)
            sum += rule.weights[k] * f(start + rule.nodes[k] / decay_rate);
        return sum * (std::exp(-decay_rate * start) / decay_rate);
    };

    V head_value = integrate_adaptive(head, graded_breaks(0.0, std::sqrt(t_split), 3), spec).value;
    for (int attempt = 0; attempt < 8; ++attempt) {
        const V tail_full = tail(lag, t_split);
        const V tail_coarse = tail(lag_half, t_split);
        const V total = head_value + tail_full;
        if (abs_value(tail_full - tail_coarse) <= spec.relative_tolerance * std::max(abs_value(total), 1e-300))
            return total;
        // push the split further out; the extra stretch joins the adaptive head
        const double next = 2.0 * t_split;
        head_value += integrate_adaptive(head, std::sqrt(t_split), std::sqrt(next), spec).value;
        t_split = next;
    }
    throw convergence_error("laplace_integral: Laguerre tail did not converge");
}

/// Integral over s in (0, inf) and u in (0, inf) of w(s) exp(-u_decay u) f(s, u),
/// with w(s) = exp(-s^2/4) when gaussian_weight is set and exp(-s) otherwise.
template <class F>
auto double_integral_su(const F& f, bool gaussian_weight, double u_decay, const QuadratureSpec& spec)
    -> std::invoke_result_t<const F&, double, double> {
    auto inner = [&](double s) {
        return laplace_integral([&](double u) { return f(s, u); }, u_decay, spec);
    };
    if (gaussian_weight) {
        // exp(-s^2/4) < 1e-17 beyond s = 12.6
        const double s_max = 2.0 * std::sqrt(40.0);
        return integrate_adaptive([&](double s) { return std::exp(-0.25 * s * s) * inner(s); }, 0.0, s_max, spec)
            .value;
    }
    return laplace_integral(inner, 1.0, spec);
}

} // namespace renorm
