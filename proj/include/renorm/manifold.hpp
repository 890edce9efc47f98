#pragma once

// Model geometries: heat kernels, geodesic distances, eigenmodes and the
// comparison bounds (Gaussian heat-kernel upper bounds, Bishop-Guenther
// Jacobian bounds) for flat space, flat tori, the round sphere and the
// hyperbolic plane.
//
// Conventions: the heat kernel solves d/dt K = kappa * Laplacian K, so
// kappa = 1/(2m) for non-relativistic particles of mass m and kappa = 1 for the
// relativistic (subordinated) models. Points are stored in intrinsic
// coordinates: fundamental-domain coordinates on tori, Cartesian coordinates in
// flat space, unit vectors for the sphere and unit hyperboloid vectors
// (x0^2 - x1^2 - x2^2 = 1) for H^2.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "renorm/errors.hpp"
#include "renorm/specialfn.hpp"

namespace renorm {

enum class GeometryKind { FlatSpace, FlatTorus, Sphere2, Hyperbolic2 };
enum class ManifoldClass { Compact, CartanHadamard };

inline std::string to_string(GeometryKind k) {
    switch (k) {
    case GeometryKind::FlatSpace: return "flat";
    case GeometryKind::FlatTorus: return "torus";
    case GeometryKind::Sphere2: return "sphere";
    case GeometryKind::Hyperbolic2: return "hyperbolic";
    }
    return "?";
}

inline std::string to_string(ManifoldClass c) { return c == ManifoldClass::Compact ? "compact" : "cartan-hadamard"; }

struct Point {
    std::array<double, 3> c{};

    double operator[](std::size_t i) const { return c[i]; }
    double& operator[](std::size_t i) { return c[i]; }
    bool operator==(const Point&) const = default;
};

class ManifoldSpec {
public:
    static ManifoldSpec flat_space(int dimension, double kappa) {
        check_dimension(dimension);
        check_positive(kappa, "kappa");
        ManifoldSpec s;
        s.kind_ = GeometryKind::FlatSpace;
        s.dimension_ = dimension;
        s.kappa_ = kappa;
        return s;
    }

    static ManifoldSpec flat_torus(std::vector<double> sides, double kappa) {
        check_dimension(static_cast<int>(sides.size()));
        check_positive(kappa, "kappa");
        for (double l : sides) check_positive(l, "torus side");
        ManifoldSpec s;
        s.kind_ = GeometryKind::FlatTorus;
        s.dimension_ = static_cast<int>(sides.size());
        s.kappa_ = kappa;
        s.sides_ = std::move(sides);
        return s;
    }

    static ManifoldSpec sphere(double radius, double kappa) {
        check_positive(radius, "sphere radius");
        check_positive(kappa, "kappa");
        ManifoldSpec s;
        s.kind_ = GeometryKind::Sphere2;
        s.dimension_ = 2;
        s.kappa_ = kappa;
        s.radius_ = radius;
        return s;
    }

    static ManifoldSpec hyperbolic(double radius, double kappa) {
        check_positive(radius, "hyperbolic radius");
        check_positive(kappa, "kappa");
        ManifoldSpec s;
        s.kind_ = GeometryKind::Hyperbolic2;
        s.dimension_ = 2;
        s.kappa_ = kappa;
        s.radius_ = radius;
        return s;
    }

    GeometryKind kind() const { return kind_; }
    int dimension() const { return dimension_; }
    double kappa() const { return kappa_; }
    /// Particle mass in the kappa = 1/(2m) convention.
    double mass() const { return 0.5 / kappa_; }
    const std::vector<double>& sides() const { return sides_; }
    double radius() const { return radius_; }

    ManifoldClass manifold_class() const {
        return (kind_ == GeometryKind::FlatTorus || kind_ == GeometryKind::Sphere2) ? ManifoldClass::Compact
                                                                                    : ManifoldClass::CartanHadamard;
    }

    double volume() const {
        switch (kind_) {
        case GeometryKind::FlatTorus: {
            double v = 1.0;
            for (double l : sides_) v *= l;
            return v;
        }
        case GeometryKind::Sphere2: return 4.0 * std::numbers::pi * radius_ * radius_;
        default: return std::numeric_limits<double>::infinity();
        }
    }

    /// Ricci lower bound K1 (per unit direction) and sectional upper bound K2.
    double ricci_lower() const { return curvature(); }
    double sectional_upper() const { return curvature(); }

    double injectivity_radius() const {
        switch (kind_) {
        case GeometryKind::FlatTorus: return 0.5 * *std::min_element(sides_.begin(), sides_.end());
        case GeometryKind::Sphere2: return std::numbers::pi * radius_;
        default: return std::numeric_limits<double>::infinity();
        }
    }

    /// Characteristic length: radius for curved spaces, L/(2 pi) for tori, 1 in flat space.
    double length_scale() const {
        switch (kind_) {
        case GeometryKind::FlatTorus:
            return *std::min_element(sides_.begin(), sides_.end()) / (2.0 * std::numbers::pi);
        case GeometryKind::Sphere2:
        case GeometryKind::Hyperbolic2: return radius_;
        default: return 1.0;
        }
    }

    /// Stable identifier used as the constants-registry key.
    std::string signature() const {
        std::string s = to_string(kind_) + "/D" + std::to_string(dimension_) + "/kappa=" + fmt(kappa_);
        if (kind_ == GeometryKind::FlatTorus)
            for (double l : sides_) s += "/L=" + fmt(l);
        if (kind_ == GeometryKind::Sphere2 || kind_ == GeometryKind::Hyperbolic2) s += "/rho=" + fmt(radius_);
        return s;
    }

    ManifoldSpec with_kappa(double kappa) const {
        check_positive(kappa, "kappa");
        ManifoldSpec s = *this;
        s.kappa_ = kappa;
        return s;
    }

private:
    ManifoldSpec() = default;

    double curvature() const {
        switch (kind_) {
        case GeometryKind::Sphere2: return 1.0 / (radius_ * radius_);
        case GeometryKind::Hyperbolic2: return -1.0 / (radius_ * radius_);
        default: return 0.0;
        }
    }

    static void check_dimension(int d) {
        if (d != 2 && d != 3) throw domain_error("ManifoldSpec: dimension must be 2 or 3");
    }
    static void check_positive(double v, const char* what) {
        if (!(v > 0.0) || !std::isfinite(v)) throw domain_error(std::string("ManifoldSpec: ") + what + " must be positive");
    }
    static std::string fmt(double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return buf;
    }

    GeometryKind kind_ = GeometryKind::FlatSpace;
    int dimension_ = 2;
    double kappa_ = 0.5;
    std::vector<double> sides_;
    double radius_ = 1.0;
};

// ---------------------------------------------------------------------------
// points

inline Point flat_point(double x, double y, double z = 0.0) { return Point{{x, y, z}}; }

/// Torus point; coordinates are wrapped into the fundamental domain.
inline Point torus_point(const ManifoldSpec& m, std::array<double, 3> x) {
    Point p;
    for (int i = 0; i < m.dimension(); ++i) {
        const double l = m.sides()[i];
        double v = std::fmod(x[i], l);
        if (v < 0.0) v += l;
        p[i] = v;
    }
    return p;
}

/// Unit vector at colatitude theta and azimuth phi.
inline Point sphere_point(double theta, double phi) {
    return Point{{std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta)}};
}

/// Hyperboloid point at geodesic polar coordinates (r, phi) around (1, 0, 0) on the unit hyperboloid.
inline Point hyperbolic_point(double r, double phi) {
    return Point{{std::cosh(r), std::sinh(r) * std::cos(phi), std::sinh(r) * std::sin(phi)}};
}

/// Uniformly distributed points (for compact spaces) or points in a ball of radius `spread`
/// times the length scale (non-compact spaces). Deterministic for a given seed.
inline std::vector<Point> random_points(const ManifoldSpec& m, int count, std::uint64_t seed, double spread = 2.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::vector<Point> out;
    out.reserve(count);
    for (int k = 0; k < count; ++k) {
        switch (m.kind()) {
        case GeometryKind::FlatTorus: {
            std::array<double, 3> x{};
            for (int i = 0; i < m.dimension(); ++i) x[i] = u01(rng) * m.sides()[i];
            out.push_back(torus_point(m, x));
            break;
        }
        case GeometryKind::FlatSpace: {
            Point p;
            for (int i = 0; i < m.dimension(); ++i) p[i] = (2.0 * u01(rng) - 1.0) * spread;
            out.push_back(p);
            break;
        }
        case GeometryKind::Sphere2: {
            const double z = 2.0 * u01(rng) - 1.0;
            out.push_back(sphere_point(std::acos(z), 2.0 * std::numbers::pi * u01(rng)));
            break;
        }
        case GeometryKind::Hyperbolic2:
            out.push_back(hyperbolic_point(spread * u01(rng), 2.0 * std::numbers::pi * u01(rng)));
            break;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// geodesic distance

/// Signed torus displacement per axis, reduced to [-L/2, L/2].
inline std::array<double, 3> torus_displacement(const ManifoldSpec& m, const Point& x, const Point& y) {
    std::array<double, 3> d{};
    for (int i = 0; i < m.dimension(); ++i) {
        const double l = m.sides()[i];
        double v = std::fmod(x[i] - y[i], l);
        if (v > 0.5 * l) v -= l;
        if (v < -0.5 * l) v += l;
        d[i] = v;
    }
    return d;
}

inline double geodesic_distance(const ManifoldSpec& m, const Point& x, const Point& y) {
    switch (m.kind()) {
    case GeometryKind::FlatSpace: {
        double s = 0.0;
        for (int i = 0; i < m.dimension(); ++i) s += (x[i] - y[i]) * (x[i] - y[i]);
        return std::sqrt(s);
    }
    case GeometryKind::FlatTorus: {
        const auto d = torus_displacement(m, x, y);
        double s = 0.0;
        for (int i = 0; i < m.dimension(); ++i) s += d[i] * d[i];
        return std::sqrt(s);
    }
    case GeometryKind::Sphere2: {
        // atan2 form is accurate for both nearby and antipodal points
        const double cx = x[1] * y[2] - x[2] * y[1];
        const double cy = x[2] * y[0] - x[0] * y[2];
        const double cz = x[0] * y[1] - x[1] * y[0];
        const double dot = x[0] * y[0] + x[1] * y[1] + x[2] * y[2];
        return m.radius() * std::atan2(std::sqrt(cx * cx + cy * cy + cz * cz), dot);
    }
    case GeometryKind::Hyperbolic2: {
        // d = 2 rho asinh(|x - y|_M / 2) with the Minkowski norm of the chord
        // far apart: the chord cancels catastrophically, use cosh d = <x, y>_M instead
        const double b = x[0] * y[0] - x[1] * y[1] - x[2] * y[2];
        if (b > 2.0) return m.radius() * std::acosh(b);
        const double d0 = x[0] - y[0], d1 = x[1] - y[1], d2 = x[2] - y[2];
        const double chord2 = std::max(0.0, d1 * d1 + d2 * d2 - d0 * d0);
        return 2.0 * m.radius() * std::asinh(0.5 * std::sqrt(chord2));
    }
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// heat kernels

namespace detail {

/// Periodic 1D heat kernel by the image sum, s = kappa t.
inline double theta_images(double delta, double side, double s) {
    const double reach = std::sqrt(4.0 * s * 41.0);
    const int n_max = static_cast<int>(std::ceil(reach / side)) + 1;
    double sum = 0.0;
    for (int n = -n_max; n <= n_max; ++n) {
        const double x = delta + n * side;
        sum += std::exp(-x * x / (4.0 * s));
    }
    return sum / std::sqrt(4.0 * std::numbers::pi * s);
}

/// Periodic 1D heat kernel by the Fourier series, s = kappa t.
inline double theta_modes(double delta, double side, double s) {
    const double q = 2.0 * std::numbers::pi / side;
    double sum = 1.0;
    for (int k = 1;; ++k) {
        const double w = std::exp(-s * q * q * k * k);
        if (w < 1e-18) break;
        sum += 2.0 * w * std::cos(q * k * delta);
    }
    return sum / side;
}

inline double theta_periodic(double delta, double side, double s) {
    return s <= 0.25 * side * side ? theta_images(delta, side, s) : theta_modes(delta, side, s);
}

/// Unit-sphere kernel (Laplacian eigenvalues l(l+1)) by the Legendre series.
inline double sphere_kernel_legendre(double cos_theta, double tau) {
    double p0 = 1.0, p1 = cos_theta;
    double sum = 1.0;
    for (int l = 1;; ++l) {
        const double w = (2.0 * l + 1.0) * std::exp(-tau * l * (l + 1.0));
        sum += w * p1;
        if (w < 1e-18 * std::abs(sum) && l > 2) break;
        const double p2 = ((2.0 * l + 1.0) * cos_theta * p1 - l * p0) / (l + 1.0);
        p0 = p1;
        p1 = p2;
    }
    return sum / (4.0 * std::numbers::pi);
}

inline double sinc(double x) { return std::abs(x) < 1e-4 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }
inline double shc(double x) { return std::abs(x) < 1e-4 ? 1.0 + x * x / 6.0 : std::sinh(x) / x; }

/// Unit-sphere kernel for small tau from the exact representation
/// K = sqrt2 e^{tau/4} (4 pi tau)^{-3/2} sum_n (-1)^n int_theta^pi (s + 2 pi n) e^{-(s+2 pi n)^2/4tau} / sqrt(cos theta - cos s) ds.
inline double sphere_kernel_small_time(double theta, double tau) {
    const double c = std::numbers::pi - theta;
    if (c <= 0.0 && theta <= 0.0) return 0.0;
    QuadratureSpec q;
    q.node_count = 24;
    q.relative_tolerance = 1e-13;
    // substitution s = theta + c v^2 removes the inverse square root at s = theta
    auto integrand = [&](double v) {
        const double s = theta + c * v * v;
        double g = 0.0;
        for (int n = -2; n <= 2; ++n) {
            const double y = s + 2.0 * std::numbers::pi * n;
            g += ((n % 2 == 0) ? 1.0 : -1.0) * y * std::exp(-y * y / (4.0 * tau));
        }
        const double a1 = 1.0 - 0.5 * v * v;
        const double a2 = 0.5 * v * v;
        // sin((s + theta)/2) = sin(theta + c a2) = sin(c a1); pick the argument away from pi
        const double x1 = theta + c * a2;
        const double s1 = (x1 <= 0.5 * std::numbers::pi && c * a1 > 1e-4) ? std::sin(x1) / (c * a1) : sinc(c * a1);
        return 2.0 * g / std::sqrt(a1 * s1 * sinc(c * a2));
    };
    // cos(theta) - cos(s) = 2 sin(c a1) sin(c a2) = 2 c^2 a1 a2 sinc sinc, so
    // ds / sqrt(...) = 2 c v dv / (c v sqrt(a1 sinc sinc)).
    // The Gaussian concentrates near v ~ sqrt(2 sqrt(tau)/c); grade panels toward 0.
    const double integral = integrate_adaptive(integrand, graded_breaks(0.0, 1.0, 4), q).value;
    return std::sqrt(2.0) * std::exp(0.25 * tau) * std::pow(4.0 * std::numbers::pi * tau, -1.5) * integral;
}

/// Unit-H^2 kernel (bottom of spectrum 1/4) from the closed-form integral
/// K = sqrt2 e^{-tau/4} (4 pi tau)^{-3/2} int_r^inf s e^{-s^2/4tau} / sqrt(cosh s - cosh r) ds.
inline double hyperbolic_kernel(double r, double tau) {
    // s = r + v^2; cosh s - cosh r = 2 sinh(r + v^2/2) sinh(v^2/2) = v^2 sinh(r + v^2/2) shc(v^2/2)
    auto integrand = [&](double v) {
        const double q = v * v;
        const double s = r + q;
        const double expo = -q * (2.0 * r + q) / (4.0 * tau);
        return 2.0 * s * std::exp(expo) / std::sqrt(std::sinh(r + 0.5 * q) * shc(0.5 * q));
    };
    // cut where the Gaussian and the 1/sqrt(cosh) factor together drop below e^{-45}
    const double b = r / (2.0 * tau) + 0.5;
    const double q_max = (-b + std::sqrt(b * b + 4.0 * 45.0 / (4.0 * tau))) / (2.0 / (4.0 * tau));
    QuadratureSpec q;
    q.node_count = 24;
    q.relative_tolerance = 1e-13;
    const double integral = integrate_adaptive(integrand, graded_breaks(0.0, std::sqrt(q_max), 4), q).value;
    if (r == 0.0 && integral == 0.0) return 0.0;
    return std::sqrt(2.0) * std::exp(-0.25 * tau) * std::pow(4.0 * std::numbers::pi * tau, -1.5) *
           std::exp(-r * r / (4.0 * tau)) * integral;
}

} // namespace detail

/// Time below which the sphere kernel switches from the Legendre series to the integral representation (in units of rho^2/kappa).
inline constexpr double kSphereSeriesMinTime = 0.1;

/// Heat kernel K_t(x, y) for d/dt = kappa Laplacian.
inline double heat_kernel(const ManifoldSpec& m, const Point& x, const Point& y, double t) {
    if (!(t > 0.0)) throw domain_error("heat_kernel: t must be positive");
    const double s = m.kappa() * t;
    switch (m.kind()) {
    case GeometryKind::FlatSpace: {
        const double d = geodesic_distance(m, x, y);
        return std::pow(4.0 * std::numbers::pi * s, -0.5 * m.dimension()) * std::exp(-d * d / (4.0 * s));
    }
    case GeometryKind::FlatTorus: {
        const auto d = torus_displacement(m, x, y);
        double k = 1.0;
        for (int i = 0; i < m.dimension(); ++i) k *= detail::theta_periodic(std::abs(d[i]), m.sides()[i], s);
        return k;
    }
    case GeometryKind::Sphere2: {
        const double rho = m.radius();
        const double tau = s / (rho * rho);
        const double theta = geodesic_distance(m, x, y) / rho;
        const double k = tau >= kSphereSeriesMinTime ? detail::sphere_kernel_legendre(std::cos(theta), tau)
                                                     : detail::sphere_kernel_small_time(theta, tau);
        return k / (rho * rho);
    }
    case GeometryKind::Hyperbolic2: {
        const double rho = m.radius();
        return detail::hyperbolic_kernel(geodesic_distance(m, x, y) / rho, s / (rho * rho)) / (rho * rho);
    }
    }
    return 0.0;
}

/// Torus kernel forced through the image sum (all axes).
inline double torus_heat_kernel_images(const ManifoldSpec& m, const Point& x, const Point& y, double t) {
    if (m.kind() != GeometryKind::FlatTorus) throw unsupported_error("torus_heat_kernel_images: not a torus");
    const auto d = torus_displacement(m, x, y);
    double k = 1.0;
    for (int i = 0; i < m.dimension(); ++i) k *= detail::theta_images(std::abs(d[i]), m.sides()[i], m.kappa() * t);
    return k;
}

/// Torus kernel forced through the mode sum (all axes).
inline double torus_heat_kernel_modes(const ManifoldSpec& m, const Point& x, const Point& y, double t) {
    if (m.kind() != GeometryKind::FlatTorus) throw unsupported_error("torus_heat_kernel_modes: not a torus");
    const auto d = torus_displacement(m, x, y);
    double k = 1.0;
    for (int i = 0; i < m.dimension(); ++i) k *= detail::theta_modes(std::abs(d[i]), m.sides()[i], m.kappa() * t);
    return k;
}

/// Sphere kernel forced through the Legendre series or the integral representation.
inline double sphere_heat_kernel_series(const ManifoldSpec& m, const Point& x, const Point& y, double t) {
    const double rho = m.radius();
    return detail::sphere_kernel_legendre(std::cos(geodesic_distance(m, x, y) / rho), m.kappa() * t / (rho * rho)) /
           (rho * rho);
}
inline double sphere_heat_kernel_integral(const ManifoldSpec& m, const Point& x, const Point& y, double t) {
    const double rho = m.radius();
    return detail::sphere_kernel_small_time(geodesic_distance(m, x, y) / rho, m.kappa() * t / (rho * rho)) /
           (rho * rho);
}

/// A point used when only the on-diagonal kernel matters (all model spaces are homogeneous).
inline Point reference_point(const ManifoldSpec& m) {
    switch (m.kind()) {
    case GeometryKind::Sphere2: return sphere_point(0.0, 0.0);
    case GeometryKind::Hyperbolic2: return hyperbolic_point(0.0, 0.0);
    default: return Point{};
    }
}

// ---------------------------------------------------------------------------
// heat kernel upper bounds and the constants registry

/// Constants of the Gaussian upper bounds. Compact: [C1/V + C2/(kappa t)^{D/2}] exp(-d^2/(2 kappa C3 t)).
/// Cartan-Hadamard: C4/(kappa t)^{D/2} exp(-d^2/(2 kappa C5 t)). (kappa t = t/2m.)
struct HeatBoundConstants {
    double c1 = 0.0, c2 = 0.0, c3 = 0.0;
    double c4 = 0.0, c5 = 0.0;
    double xi = 0.0;                 ///< Cartan-Hadamard shift of the diagonal principal bound; externally defined
    std::string provenance = "calibrated";
    double t_min = 0.0, t_max = 0.0; ///< calibration window in time
};

class ConstantsRegistry {
public:
    void insert(const ManifoldSpec& m, HeatBoundConstants c) { table_[m.signature()] = std::move(c); }

    const HeatBoundConstants& at(const ManifoldSpec& m) const {
        auto it = table_.find(m.signature());
        if (it == table_.end()) throw missing_constants_error("no heat-bound constants for " + m.signature());
        return it->second;
    }

    bool contains(const ManifoldSpec& m) const { return table_.count(m.signature()) != 0; }
    const std::map<std::string, HeatBoundConstants>& entries() const { return table_; }

private:
    std::map<std::string, HeatBoundConstants> table_;
};

inline double heat_kernel_upper_bound_from(const ManifoldSpec& m, const HeatBoundConstants& c, double d, double t) {
    if (!(t > 0.0)) throw domain_error("heat_kernel_upper_bound: t must be positive");
    const double s = m.kappa() * t;
    const double dim = m.dimension();
    if (m.manifold_class() == ManifoldClass::Compact)
        return (c.c1 / m.volume() + c.c2 / std::pow(s, 0.5 * dim)) * std::exp(-d * d / (2.0 * c.c3 * s));
    return c.c4 / std::pow(s, 0.5 * dim) * std::exp(-d * d / (2.0 * c.c5 * s));
}

inline double heat_kernel_upper_bound(const ManifoldSpec& m, const ConstantsRegistry& reg, const Point& x,
                                      const Point& y, double t) {
    return heat_kernel_upper_bound_from(m, reg.at(m), geodesic_distance(m, x, y), t);
}

/// Calibration pass: fixes the Gaussian width constant (C3 = 4 compact, C5 = 2 Cartan-Hadamard),
/// then takes the smallest prefactor dominating the kernel on a dense (displacement, t) grid and
/// inflates it by `safety`. t ranges over [1e-3, 1e2] length_scale^2 / kappa.
inline HeatBoundConstants calibrate_heat_bound(const ManifoldSpec& m, double safety = 1.05) {
    HeatBoundConstants c;
    const double ell = m.length_scale();
    c.t_min = 1e-3 * ell * ell / m.kappa();
    c.t_max = 1e2 * ell * ell / m.kappa();
    const double dim = m.dimension();
    const Point origin = reference_point(m);

    std::vector<std::pair<Point, double>> targets; // point and its distance to the origin
    const int nd = 48;
    switch (m.kind()) {
    case GeometryKind::FlatTorus: {
        // displacements over one octant of the fundamental domain
        const int per = m.dimension() == 2 ? 24 : 10;
        for (int i = 0; i <= per; ++i)
            for (int j = 0; j <= per; ++j)
                for (int k = 0; k <= (m.dimension() == 3 ? per : 0); ++k) {
                    std::array<double, 3> x{0.5 * m.sides()[0] * i / per, 0.5 * m.sides()[1] * j / per, 0.0};
                    if (m.dimension() == 3) x[2] = 0.5 * m.sides()[2] * k / per;
                    const Point p = torus_point(m, x);
                    targets.emplace_back(p, geodesic_distance(m, origin, p));
                }
        break;
    }
    case GeometryKind::Sphere2:
        for (int i = 0; i <= nd; ++i) {
            const Point p = sphere_point(std::numbers::pi * i / nd, 0.0);
            targets.emplace_back(p, geodesic_distance(m, origin, p));
        }
        break;
    case GeometryKind::Hyperbolic2:
        for (int i = 0; i <= nd; ++i) {
            const Point p = hyperbolic_point(8.0 * i / nd, 0.0);
            targets.emplace_back(p, geodesic_distance(m, origin, p));
        }
        break;
    case GeometryKind::FlatSpace:
        for (int i = 0; i <= nd; ++i) {
            const Point p = flat_point(8.0 * ell * i / nd, 0.0, 0.0);
            targets.emplace_back(p, geodesic_distance(m, origin, p));
        }
        break;
    }

    const int nt = 60;
    if (m.manifold_class() == ManifoldClass::Compact) {
        c.c3 = 4.0;
        c.c1 = safety;
        double worst = 0.0;
        for (int it = 0; it <= nt; ++it) {
            const double t = c.t_min * std::pow(c.t_max / c.t_min, double(it) / nt);
            const double s = m.kappa() * t;
            for (const auto& [p, d] : targets) {
                const double k = heat_kernel(m, origin, p, t);
                if (k < 1e-290) continue;
                const double need =
                    (std::exp(std::log(k) + d * d / (2.0 * c.c3 * s)) - c.c1 / m.volume()) * std::pow(s, 0.5 * dim);
                worst = std::max(worst, need);
            }
        }
        c.c2 = safety * worst;
    } else {
        c.c5 = 2.0;
        double worst = 0.0;
        for (int it = 0; it <= nt; ++it) {
            const double t = c.t_min * std::pow(c.t_max / c.t_min, double(it) / nt);
            const double s = m.kappa() * t;
            for (const auto& [p, d] : targets) {
                const double k = heat_kernel(m, origin, p, t);
                // deep in the Gaussian tail the kernel is subnormal; the ratio is taken in logs elsewhere
                if (k < 1e-290) continue;
                worst = std::max(worst, std::exp(std::log(k) + 0.5 * dim * std::log(s) + d * d / (2.0 * c.c5 * s)));
            }
        }
        // flat space is saturated exactly by (4 pi)^{-D/2}; no inflation needed there
        c.c4 = m.kind() == GeometryKind::FlatSpace ? std::pow(4.0 * std::numbers::pi, -0.5 * dim) : safety * worst;
        c.xi = 0.0;
        c.provenance = m.kind() == GeometryKind::FlatSpace ? "exact" : "calibrated";
    }
    return c;
}

// ---------------------------------------------------------------------------
// Bishop-Guenther comparison

struct JacobianBounds {
    double lower;
    double upper;
};

/// (sn_{K2}(r)/r)^{D-1} <= J(r, theta) <= (sn_{K1}(r)/r)^{D-1}.
inline JacobianBounds jacobian_bounds(const ManifoldSpec& m, double r) {
    if (!(r > 0.0) || r >= m.injectivity_radius())
        throw domain_error("jacobian_bounds: radius must lie in (0, injectivity radius)");
    const double e = m.dimension() - 1.0;
    return {std::pow(sn(m.sectional_upper(), r) / r, e), std::pow(sn(m.ricci_lower(), r) / r, e)};
}

/// Geodesic-polar area element ratio J(r) = (length of geodesic circle of radius r)/(2 pi r),
/// measured from an inscribed polygon with `samples` vertices built by the exponential map. 2D only.
inline double measured_jacobian(const ManifoldSpec& m, double r, int samples = 4096) {
    if (m.dimension() != 2) throw unsupported_error("measured_jacobian: two-dimensional geometries only");
    auto on_circle = [&](double phi) -> Point {
        switch (m.kind()) {
        case GeometryKind::Sphere2: return sphere_point(r / m.radius(), phi);
        case GeometryKind::Hyperbolic2: return hyperbolic_point(r / m.radius(), phi);
        case GeometryKind::FlatTorus: return torus_point(m, {r * std::cos(phi), r * std::sin(phi), 0.0});
        default: return flat_point(r * std::cos(phi), r * std::sin(phi));
        }
    };
    auto perimeter = [&](int n) {
        double length = 0.0;
        Point prev = on_circle(0.0);
        for (int k = 1; k <= n; ++k) {
            const Point next = on_circle(2.0 * std::numbers::pi * k / n);
            length += geodesic_distance(m, prev, next);
            prev = next;
        }
        return length;
    };
    // inscribed polygons converge like n^{-2}; one Richardson step
    const double length = (4.0 * perimeter(2 * samples) - perimeter(samples)) / 3.0;
    return length / (2.0 * std::numbers::pi * r);
}

// ---------------------------------------------------------------------------
// eigenmodes of compact model spaces

class SpectralBasis {
public:
    struct Mode {
        double eigenvalue;         ///< Laplace-Beltrami eigenvalue (without kappa)
        std::array<int, 3> index;  ///< torus: lattice vector; sphere: (l, m, 0)
    };

    SpectralBasis(ManifoldSpec m, std::vector<Mode> modes) : manifold_(std::move(m)), modes_(std::move(modes)) {}

    int size() const { return static_cast<int>(modes_.size()); }
    const Mode& mode(int sigma) const { return modes_[sigma]; }
    double eigenvalue(int sigma) const { return modes_[sigma].eigenvalue; }
    const ManifoldSpec& manifold() const { return manifold_; }

    /// f_sigma(x): complex plane waves on tori, real spherical harmonics on the sphere.
    cplx evaluate(int sigma, const Point& x) const {
        const Mode& md = modes_[sigma];
        if (manifold_.kind() == GeometryKind::FlatTorus) {
            double phase = 0.0;
            for (int i = 0; i < manifold_.dimension(); ++i)
                phase += 2.0 * std::numbers::pi * md.index[i] * x[i] / manifold_.sides()[i];
            return std::polar(1.0 / std::sqrt(manifold_.volume()), phase);
        }
        const int l = md.index[0], mm = md.index[1];
        const double theta = std::acos(std::clamp(x[2], -1.0, 1.0));
        const double phi = std::atan2(x[1], x[0]);
        const double y = std::sph_legendre(l, std::abs(mm), theta);
        double v = y;
        if (mm > 0) v = std::sqrt(2.0) * y * std::cos(mm * phi);
        if (mm < 0) v = std::sqrt(2.0) * y * std::sin(-mm * phi);
        if (mm != 0 && (std::abs(mm) % 2 == 1)) v = -v; // drop the Condon-Shortley phase
        return v / manifold_.radius();
    }

    /// sum_sigma |f_sigma(x)|^2 exp(-kappa lambda_sigma t) - K_t(x, x).
    double completeness_defect(const Point& x, double t) const {
        double sum = 0.0;
        for (int s = 0; s < size(); ++s)
            sum += std::norm(evaluate(s, x)) * std::exp(-manifold_.kappa() * eigenvalue(s) * t);
        return sum - heat_kernel(manifold_, x, x, t);
    }

    /// Smallest t on a geometric grid beyond which |completeness_defect| stays below tol.
    double t_min(double tol = 1e-10) const {
        const Point x = reference_point(manifold_);
        const double ell = manifold_.length_scale();
        double best = std::numeric_limits<double>::infinity();
        for (int k = 40; k >= -60; --k) {
            const double t = ell * ell / manifold_.kappa() * std::pow(2.0, 0.25 * k);
            if (std::abs(completeness_defect(x, t)) >= tol) break;
            best = t;
        }
        return best;
    }

private:
    ManifoldSpec manifold_;
    std::vector<Mode> modes_;
};

/// First `count` eigenmodes in ascending eigenvalue order (ties broken by index, deterministic).
inline SpectralBasis spectral_basis(const ManifoldSpec& m, int count) {
    if (count < 1) throw domain_error("spectral_basis: mode count must be positive");
    std::vector<SpectralBasis::Mode> modes;
    if (m.kind() == GeometryKind::FlatTorus) {
        const int dim = m.dimension();
        const double lmin = *std::min_element(m.sides().begin(), m.sides().end());
        const double lmax = *std::max_element(m.sides().begin(), m.sides().end());
        // enough lattice shells to contain `count` points
        int reach = 1;
        while (std::pow(2.0 * reach + 1.0, dim) * std::pow(lmin / lmax, dim) < 4.0 * count + 8.0) ++reach;
        reach = static_cast<int>(std::ceil(reach * lmax / lmin));
        for (int i = -reach; i <= reach; ++i)
            for (int j = -reach; j <= reach; ++j)
                for (int k = (dim == 3 ? -reach : 0); k <= (dim == 3 ? reach : 0); ++k) {
                    const std::array<int, 3> idx{i, j, k};
                    double lam = 0.0;
                    for (int a = 0; a < dim; ++a) {
                        const double q = 2.0 * std::numbers::pi * idx[a] / m.sides()[a];
                        lam += q * q;
                    }
                    modes.push_back({lam, idx});
                }
    } else if (m.kind() == GeometryKind::Sphere2) {
        const double r2 = m.radius() * m.radius();
        for (int l = 0; static_cast<int>(modes.size()) < count; ++l)
            for (int mm = -l; mm <= l; ++mm) modes.push_back({l * (l + 1.0) / r2, {l, mm, 0}});
    } else {
        throw unsupported_error("spectral_basis: no discrete spectrum on " + to_string(m.kind()));
    }
    std::stable_sort(modes.begin(), modes.end(), [](const auto& a, const auto& b) {
        if (a.eigenvalue != b.eigenvalue) return a.eigenvalue < b.eigenvalue;
        return a.index < b.index;
    });
    modes.resize(count);
    return SpectralBasis(m, std::move(modes));
}

// ---------------------------------------------------------------------------
// L^2 quadrature grids

struct QuadratureGrid {
    std::vector<Point> points;
    std::vector<double> weights;

    double total_weight() const {
        double s = 0.0;
        for (double w : weights) s += w;
        return s;
    }
};

/// Product quadrature over the manifold (or a ball of `extent` length scales around the
/// reference point for non-compact spaces). `resolution` is nodes per axis.
inline QuadratureGrid l2_grid(const ManifoldSpec& m, int resolution, double extent = 12.0) {
    QuadratureGrid g;
    switch (m.kind()) {
    case GeometryKind::FlatTorus: {
        const int dim = m.dimension();
        const double w = m.volume() / std::pow(double(resolution), dim);
        for (int i = 0; i < resolution; ++i)
            for (int j = 0; j < resolution; ++j)
                for (int k = 0; k < (dim == 3 ? resolution : 1); ++k) {
                    std::array<double, 3> x{m.sides()[0] * i / resolution, m.sides()[1] * j / resolution, 0.0};
                    if (dim == 3) x[2] = m.sides()[2] * k / resolution;
                    g.points.push_back(torus_point(m, x));
                    g.weights.push_back(w);
                }
        break;
    }
    case GeometryKind::Sphere2: {
        const GaussRule& gl = gauss_legendre(resolution);
        const int nphi = 2 * resolution;
        const double r2 = m.radius() * m.radius();
        for (int i = 0; i < resolution; ++i)
            for (int j = 0; j < nphi; ++j) {
                g.points.push_back(sphere_point(std::acos(gl.nodes[i]), 2.0 * std::numbers::pi * j / nphi));
                g.weights.push_back(gl.weights[i] * 2.0 * std::numbers::pi / nphi * r2);
            }
        break;
    }
    case GeometryKind::Hyperbolic2:
    case GeometryKind::FlatSpace: {
        const double ell = m.length_scale();
        const double rmax = extent * ell;
        const GaussRule& gl = gauss_legendre(resolution);
        const int dim = m.dimension();
        if (dim == 3) {
            // radial Gauss x Gauss-Legendre in cos(theta) x uniform azimuth
            const int nphi = 2 * resolution;
            for (int i = 0; i < resolution; ++i) {
                const double r = 0.5 * rmax * (gl.nodes[i] + 1.0);
                for (int a = 0; a < resolution; ++a)
                    for (int b = 0; b < nphi; ++b) {
                        const double ct = gl.nodes[a], st = std::sqrt(1.0 - ct * ct);
                        const double phi = 2.0 * std::numbers::pi * b / nphi;
                        g.points.push_back(flat_point(r * st * std::cos(phi), r * st * std::sin(phi), r * ct));
                        g.weights.push_back(0.5 * rmax * gl.weights[i] * r * r * gl.weights[a] * 2.0 *
                                            std::numbers::pi / nphi);
                    }
            }
            break;
        }
        const int nphi = 2 * resolution;
        for (int i = 0; i < resolution; ++i) {
            const double r = 0.5 * rmax * (gl.nodes[i] + 1.0);
            const double area = m.kind() == GeometryKind::Hyperbolic2
                                    ? m.radius() * std::sinh(r / m.radius())
                                    : r;
            for (int j = 0; j < nphi; ++j) {
                const double phi = 2.0 * std::numbers::pi * j / nphi;
                g.points.push_back(m.kind() == GeometryKind::Hyperbolic2 ? hyperbolic_point(r / m.radius(), phi)
                                                                         : flat_point(r * std::cos(phi), r * std::sin(phi)));
                g.weights.push_back(0.5 * rmax * gl.weights[i] * area * 2.0 * std::numbers::pi / nphi);
            }
        }
        break;
    }
    }
    return g;
}

} // namespace renorm
