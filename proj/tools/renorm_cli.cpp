// renorm: command-line driver for spectra, resolvents and verification checks.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "renorm/lee.hpp"
#include "renorm/manifold.hpp"
#include "renorm/pointinteraction.hpp"
#include "renorm/relativistic.hpp"
#include "renorm/report.hpp"
#include "renorm/verification.hpp"

using json = nlohmann::ordered_json;
using namespace renorm;

namespace {

constexpr int kSchemaVersion = 1;

enum Exit { ok = 0, config_failure = 1, no_root = 2, violated = 3, numerical_failure = 4 };

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// config access with line-anchored messages

class Config {
public:
    Config(std::string path, std::string text) : path_(std::move(path)), text_(std::move(text)) {
        try {
            root_ = json::parse(text_);
        } catch (const json::parse_error& e) {
            throw ConfigError(path_ + ": " + e.what());
        }
        if (!root_.is_object()) fail("", "top level must be an object");
    }

    [[noreturn]] void fail(const std::string& pointer, const std::string& msg) const {
        throw ConfigError(path_ + ":" + std::to_string(line_of(pointer)) + ": " + (pointer.empty() ? "/" : pointer) +
                          ": " + msg);
    }

    bool has(const std::string& pointer) const { return root_.contains(json::json_pointer(pointer)); }

    const json& at(const std::string& pointer) const {
        if (!has(pointer)) fail(pointer, "required key is missing");
        return root_.at(json::json_pointer(pointer));
    }

    double number(const std::string& pointer, std::optional<double> fallback = std::nullopt) const {
        if (!has(pointer)) {
            if (fallback) return *fallback;
            fail(pointer, "required number is missing");
        }
        const json& v = at(pointer);
        if (!v.is_number()) fail(pointer, "expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) fail(pointer, "expected a finite number");
        return d;
    }

    double positive(const std::string& pointer, std::optional<double> fallback = std::nullopt) const {
        const double d = number(pointer, fallback);
        if (!(d > 0.0)) fail(pointer, "must be positive");
        return d;
    }

    int integer(const std::string& pointer, std::optional<int> fallback = std::nullopt, int minimum = 1) const {
        if (!has(pointer)) {
            if (fallback) return *fallback;
            fail(pointer, "required integer is missing");
        }
        const json& v = at(pointer);
        if (!v.is_number_integer()) fail(pointer, "expected an integer");
        const int i = v.get<int>();
        if (i < minimum) fail(pointer, "must be at least " + std::to_string(minimum));
        return i;
    }

    std::string string(const std::string& pointer, std::optional<std::string> fallback = std::nullopt) const {
        if (!has(pointer)) {
            if (fallback) return *fallback;
            fail(pointer, "required string is missing");
        }
        const json& v = at(pointer);
        if (!v.is_string()) fail(pointer, "expected a string");
        return v.get<std::string>();
    }

    std::vector<double> numbers(const std::string& pointer, std::optional<std::vector<double>> fallback = std::nullopt) const {
        if (!has(pointer)) {
            if (fallback) return *fallback;
            fail(pointer, "required array is missing");
        }
        const json& v = at(pointer);
        if (!v.is_array() || v.empty()) fail(pointer, "expected a non-empty array of numbers");
        std::vector<double> out;
        for (std::size_t k = 0; k < v.size(); ++k) out.push_back(number(pointer + "/" + std::to_string(k)));
        return out;
    }

    /// [re, im] or a plain real number.
    cplx complex(const std::string& pointer, cplx fallback) const {
        if (!has(pointer)) return fallback;
        const json& v = at(pointer);
        if (v.is_number()) return number(pointer);
        if (!v.is_array() || v.size() != 2) fail(pointer, "expected a number or [re, im]");
        return {number(pointer + "/0"), number(pointer + "/1")};
    }

private:
    /// Line of the deepest object key of the pointer found in the source text.
    int line_of(const std::string& pointer) const {
        std::size_t pos = 0;
        std::size_t start = 1;
        while (start <= pointer.size() && !pointer.empty()) {
            const std::size_t end = pointer.find('/', start);
            const std::string token = pointer.substr(start, end == std::string::npos ? std::string::npos : end - start);
            const bool index = !token.empty() && std::all_of(token.begin(), token.end(), ::isdigit);
            if (!index) {
                const std::size_t hit = text_.find("\"" + token + "\"", pos);
                if (hit == std::string::npos) break;
                pos = hit;
            }
            if (end == std::string::npos) break;
            start = end + 1;
        }
        return 1 + static_cast<int>(std::count(text_.begin(), text_.begin() + static_cast<long>(pos), '\n'));
    }

    std::string path_, text_;
    json root_;
};

// ---------------------------------------------------------------------------
// geometry and models

enum class ModelType { nonrelativistic, relativistic, lee };

struct Setup {
    ModelType type;
    ManifoldSpec manifold;
    double mass;
};

ModelType model_type(const Config& c) {
    const std::string t = c.string("/model/type");
    if (t == "nonrelativistic") return ModelType::nonrelativistic;
    if (t == "relativistic") return ModelType::relativistic;
    if (t == "lee") return ModelType::lee;
    c.fail("/model/type", "expected nonrelativistic, relativistic or lee");
}

std::string to_string(ModelType t) {
    switch (t) {
    case ModelType::nonrelativistic: return "nonrelativistic";
    case ModelType::relativistic: return "relativistic";
    case ModelType::lee: return "lee";
    }
    return "?";
}

Setup make_setup(const Config& c) {
    const ModelType type = model_type(c);
    const double mass = c.positive("/model/mass");
    const double kappa = type == ModelType::relativistic ? 1.0 : 0.5 / mass;
    const std::string kind = c.string("/geometry/kind");
    const int dim = c.integer("/geometry/dimension", 2, 2);
    if (dim > 3) c.fail("/geometry/dimension", "must be 2 or 3");
    try {
        if (kind == "flat") return {type, ManifoldSpec::flat_space(dim, kappa), mass};
        if (kind == "torus") {
            const auto sides = c.numbers("/geometry/sides");
            if (static_cast<int>(sides.size()) != dim) c.fail("/geometry/sides", "needs one side length per dimension");
            for (std::size_t k = 0; k < sides.size(); ++k)
                if (!(sides[k] > 0.0)) c.fail("/geometry/sides/" + std::to_string(k), "must be positive");
            return {type, ManifoldSpec::flat_torus(sides, kappa), mass};
        }
        if (kind == "sphere" || kind == "hyperbolic") {
            if (dim != 2) c.fail("/geometry/dimension", kind + " geometries are two-dimensional");
            const double rho = c.positive("/geometry/radius");
            return {type, kind == "sphere" ? ManifoldSpec::sphere(rho, kappa) : ManifoldSpec::hyperbolic(rho, kappa), mass};
        }
    } catch (const renorm::domain_error& e) {
        c.fail("/geometry", e.what());
    }
    c.fail("/geometry/kind", "expected flat, torus, sphere or hyperbolic");
}

/// Cartesian coordinates on flat spaces and tori, [theta, phi] on the sphere, [r, phi] (geodesic) on H^2.
Point parse_point(const Config& c, const ManifoldSpec& m, const std::string& pointer) {
    const auto x = c.numbers(pointer);
    switch (m.kind()) {
    case GeometryKind::FlatSpace:
    case GeometryKind::FlatTorus: {
        if (static_cast<int>(x.size()) != m.dimension()) c.fail(pointer, "needs one coordinate per dimension");
        std::array<double, 3> p{x[0], x[1], x.size() > 2 ? x[2] : 0.0};
        return m.kind() == GeometryKind::FlatTorus ? torus_point(m, p) : flat_point(p[0], p[1], p[2]);
    }
    case GeometryKind::Sphere2:
        if (x.size() != 2) c.fail(pointer, "sphere points are [theta, phi]");
        return sphere_point(x[0], x[1]);
    case GeometryKind::Hyperbolic2:
        if (x.size() != 2) c.fail(pointer, "hyperbolic points are [r, phi]");
        if (x[0] < 0.0) c.fail(pointer, "geodesic radius must be non-negative");
        return hyperbolic_point(x[0] / m.radius(), x[1]);
    }
    c.fail(pointer, "unsupported geometry");
}

std::vector<Point> parse_centers(const Config& c, const ManifoldSpec& m) {
    const json& arr = c.at("/model/centers");
    if (!arr.is_array() || arr.empty()) c.fail("/model/centers", "expected a non-empty array of points");
    std::vector<Point> out;
    for (std::size_t k = 0; k < arr.size(); ++k) out.push_back(parse_point(c, m, "/model/centers/" + std::to_string(k)));
    return out;
}

CenterSet make_centers(const Config& c, const Setup& s) {
    CenterSet cs{parse_centers(c, s.manifold), c.numbers("/model/mu")};
    if (cs.mu.size() != cs.positions.size()) c.fail("/model/mu", "needs one value per center");
    for (std::size_t k = 0; k < cs.mu.size(); ++k)
        if (!(cs.mu[k] > 0.0)) c.fail("/model/mu/" + std::to_string(k), "must be positive");
    try {
        cs.validate(s.manifold);
    } catch (const renorm::domain_error& e) {
        c.fail("/model/centers", e.what());
    }
    return cs;
}

RelativisticModel make_relativistic(const Config& c, const Setup& s) {
    const auto centers = parse_centers(c, s.manifold);
    const auto mu = c.numbers("/model/mu");
    if (mu.size() != centers.size()) c.fail("/model/mu", "needs one value per center");
    for (std::size_t k = 0; k < mu.size(); ++k)
        if (!(mu[k] < s.mass)) c.fail("/model/mu/" + std::to_string(k), "must lie below the boson mass");
    try {
        return RelativisticModel(s.manifold, centers, mu, s.mass);
    } catch (const renorm::domain_error& e) {
        c.fail("/model", e.what());
    }
}

LeeModelSpec make_lee(const Config& c, const Setup& s) {
    const Point a = parse_point(c, s.manifold, "/model/center");
    const double lam = c.positive("/model/coupling");
    const double mu = c.number("/model/mu");
    if (!(mu < s.mass)) c.fail("/model/mu", "must lie below the boson mass");
    return {s.manifold, a, lam, s.mass, mu};
}

void require(const Config& c, const Setup& s, ModelType t, const std::string& what) {
    if (s.type != t) c.fail("/model/type", what + " needs model type " + to_string(t));
}

void require_compact(const Config& c, const Setup& s, const std::string& what) {
    if (s.manifold.manifold_class() != ManifoldClass::Compact) c.fail("/geometry/kind", what + " needs a compact geometry");
}

// ---------------------------------------------------------------------------
// emission

json measured(double v, double tol) {
    json j;
    j["value"] = v;
    j["tolerance"] = tol;
    return j;
}

json to_json(const BoundReport& r) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["check"] = r.check;
    j["model"] = r.model;
    j["geometry"] = r.geometry;
    j["sweep_variable"] = r.sweep_variable;
    j["grid"] = json::array();
    for (double g : r.grid) j["grid"].push_back(measured(g, 0.0));
    j["values"] = json::array();
    for (const auto& v : r.values) j["values"].push_back(measured(v.value, v.tolerance));
    j["bound"] = json::array();
    for (const auto& v : r.bound) j["bound"].push_back(measured(v.value, v.tolerance));
    j["bound_provenance"] = r.bound_provenance;
    if (r.exponent_fit) {
        json f;
        f["slope"] = measured(r.exponent_fit->slope, r.exponent_fit->error);
        f["intercept"] = r.exponent_fit->intercept;
        f["points"] = r.exponent_fit->points;
        if (r.expected_exponent) f["expected"] = measured(*r.expected_exponent, r.exponent_window);
        j["exponent_fit"] = f;
    } else {
        j["exponent_fit"] = nullptr;
    }
    j["verdict"] = to_string(r.verdict);
    j["notes"] = r.notes;
    return j;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string to_csv(const BoundReport& r) {
    std::ostringstream os;
    os << "# schema_version: " << kSchemaVersion << "\n# check: " << r.check << "\n# model: " << r.model
       << "\n# geometry: " << r.geometry << "\n# sweep_variable: " << r.sweep_variable
       << "\n# bound_provenance: " << r.bound_provenance << "\n# verdict: " << to_string(r.verdict) << "\n";
    if (r.exponent_fit)
        os << "# exponent_fit: slope=" << fmt(r.exponent_fit->slope) << " error=" << fmt(r.exponent_fit->error) << "\n";
    for (const auto& n : r.notes) os << "# note: " << n << "\n";
    const std::size_t per = r.values.empty() ? 1 : std::max<std::size_t>(1, r.grid.size() / r.values.size());
    os << "index,grid,value,tolerance,bound,bound_tolerance\n";
    for (std::size_t k = 0; k < r.values.size(); ++k) {
        std::string g;
        for (std::size_t q = 0; q < per && k * per + q < r.grid.size(); ++q) g += (q ? ";" : "") + fmt(r.grid[k * per + q]);
        os << k << "," << g << "," << fmt(r.values[k].value) << "," << fmt(r.values[k].tolerance) << ",";
        if (k < r.bound.size()) os << fmt(r.bound[k].value) << "," << fmt(r.bound[k].tolerance);
        else os << ",";
        os << "\n";
    }
    return os.str();
}

void write_plot_data(const std::string& prefix, const BoundReport& r) {
    const std::string path = prefix + "-" + r.check + ".dat";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write plot data to " + path);
    const bool paired = r.grid.size() == r.values.size();
    out << "# check: " << r.check << "\n# model: " << r.model << "\n# geometry: " << r.geometry << "\n";
    out << "# x: " << (paired ? r.sweep_variable : "index") << "\n# y: value\n";
    for (std::size_t k = 0; k < r.values.size(); ++k)
        out << (paired ? fmt(r.grid[k]) : std::to_string(k)) << " " << fmt(r.values[k].value) << "\n";
}

struct Outcome {
    BoundReport report;
    json extra; ///< rows for spectrum/resolvent tables
    int exit_code = Exit::ok;
};

// ---------------------------------------------------------------------------
// subcommands

std::vector<double> default_sweep() { return {1e2, 3e2, 1e3, 3e3, 1e4}; }

json state_row(const BoundState& s, double e_tol) {
    json row;
    row["energy"] = measured(s.energy, e_tol);
    json v = json::array();
    for (int k = 0; k < s.vector.size(); ++k) {
        json c;
        c["re"] = s.vector(k).real();
        c["im"] = s.vector(k).imag();
        c["tolerance"] = 1e-8;
        v.push_back(c);
    }
    row["vector"] = v;
    row["residual"] = measured(s.residual, 0.0);
    return row;
}

Outcome run_spectrum(const Config& c, const Setup& s) {
    Outcome o;
    BoundReport& r = o.report;
    r.check = "spectrum";
    r.model = to_string(s.type);
    r.geometry = s.manifold.signature();
    r.sweep_variable = "root";
    r.bound_provenance = "exact";
    const int scan = c.integer("/task/scan_points", 48, 4);
    std::vector<BoundState> states;
    std::vector<std::string> warnings;
    if (s.type == ModelType::nonrelativistic) {
        const CenterSet cs = make_centers(c, s);
        const double top = *std::max_element(cs.mu.begin(), cs.mu.end());
        const auto w = c.numbers("/task/window", std::vector<double>{-100.0 * top * top, -1e-8 * top * top});
        if (w.size() != 2 || !(w[0] < w[1]) || !(w[1] < 0.0)) c.fail("/task/window", "expected [lo, hi] with lo < hi < 0");
        const auto res = bound_states(s.manifold, cs, w[0], w[1], scan);
        states = res.states;
        warnings = res.warnings;
    } else if (s.type == ModelType::relativistic) {
        const RelativisticModel model = make_relativistic(c, s);
        const auto w = c.numbers("/task/window", std::vector<double>{-100.0 * s.mass, model.min_mu() - 1e-9 * s.mass});
        if (w.size() != 2 || !(w[0] < w[1]) || !(w[1] < model.min_mu()))
            c.fail("/task/window", "expected [lo, hi] with lo < hi < min mu");
        const std::string route = c.string("/task/route", std::string("modesum"));
        if (route != "modesum" && route != "quadrature") c.fail("/task/route", "expected modesum or quadrature");
        const auto res = rel_bound_states(model, w[0], w[1],
                                          route == "modesum" ? RelativisticRoute::ModeSum : RelativisticRoute::Quadrature,
                                          scan);
        states = res.states;
        warnings = res.warnings;
    } else {
        c.fail("/model/type", "use lee-spectrum for the Lee model");
    }
    o.extra = json::array();
    for (const auto& st : states) {
        const double tol = 1e-9 * std::max(1.0, std::abs(st.energy));
        r.grid.push_back(static_cast<double>(r.values.size()));
        r.values.push_back({st.energy, tol});
        o.extra.push_back(state_row(st, tol));
    }
    r.notes = warnings;
    r.verdict = Verdict::holds;
    if (states.empty()) {
        r.verdict = Verdict::inconclusive;
        r.notes.push_back("no root found in the window");
        o.exit_code = Exit::no_root;
    }
    return o;
}

Outcome run_resolvent(const Config& c, const Setup& s, std::uint64_t seed) {
    require(c, s, ModelType::nonrelativistic, "resolvent");
    const CenterSet cs = make_centers(c, s);
    const cplx e = c.complex("/task/energy", -1.0);
    std::vector<Point> pts;
    if (c.has("/task/points")) {
        const json& arr = c.at("/task/points");
        if (!arr.is_array() || arr.size() < 2) c.fail("/task/points", "expected at least two points");
        for (std::size_t k = 0; k < arr.size(); ++k) pts.push_back(parse_point(c, s.manifold, "/task/points/" + std::to_string(k)));
    } else {
        pts = random_points(s.manifold, 4, seed);
    }
    Outcome o;
    BoundReport& r = o.report;
    r.check = "resolvent";
    r.model = "nonrelativistic";
    r.geometry = s.manifold.signature();
    r.sweep_variable = "pair";
    r.bound_provenance = "exact";
    o.extra = json::array();
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            const cplx v = resolvent_kernel(s.manifold, cs, pts[i], pts[j], e);
            const double tol = 1e-9 * std::max(1.0, std::abs(v));
            r.grid.push_back(static_cast<double>(r.values.size()));
            r.values.push_back({std::abs(v), tol});
            json row;
            row["pair"] = {i, j};
            row["distance"] = measured(geodesic_distance(s.manifold, pts[i], pts[j]), 1e-14);
            row["re"] = measured(v.real(), tol);
            row["im"] = measured(v.imag(), tol);
            o.extra.push_back(row);
        }
    r.verdict = Verdict::holds;
    return o;
}

Outcome run_check_identity(const Config& c, const Setup& s, std::uint64_t seed) {
    Outcome o;
    if (s.type == ModelType::nonrelativistic) {
        require_compact(c, s, "check-identity");
        const CenterSet cs = make_centers(c, s);
        const cplx e1 = c.complex("/task/e1", -3.0 * s.mass), e2 = c.complex("/task/e2", -7.0 * s.mass);
        const int modes = c.integer("/task/modes", 49);
        auto basis = std::make_shared<const SpectralBasis>(spectral_basis(s.manifold, modes));
        const FunctionCalculus fc(s.manifold, cs);
        o.report = check_resolvent_identity(fc, e1, e2, test_battery(basis, cs, seed), c.positive("/task/tolerance", 1e-7));
    } else if (s.type == ModelType::relativistic) {
        const RelativisticModel model = make_relativistic(c, s);
        const cplx e1 = c.complex("/task/e1", -1.0 * s.mass), e2 = c.complex("/task/e2", -4.0 * s.mass);
        o.report = check_relativistic_identity(model, {{e1, e2}}, c.positive("/task/tolerance", 1e-8));
    } else {
        c.fail("/model/type", "check-identity supports the nonrelativistic and relativistic models");
    }
    return o;
}

Outcome run_check_limit(const Config& c, const Setup& s, std::uint64_t seed) {
    require(c, s, ModelType::nonrelativistic, "check-limit");
    require_compact(c, s, "check-limit");
    const CenterSet cs = make_centers(c, s);
    const double top = *std::max_element(cs.mu.begin(), cs.mu.end());
    const double e0 = c.positive("/task/e0", 2.0 * top * top);
    const int k_max = c.integer("/task/k_max", 4096);
    const int modes = c.integer("/task/modes", 25);
    auto basis = std::make_shared<const SpectralBasis>(spectral_basis(s.manifold, modes));
    const FunctionCalculus fc(s.manifold, cs);
    const auto battery = test_battery(basis, cs, seed);
    const auto res = check_strong_limit(fc, battery.front().f, e0, k_max, c.integer("/task/monotone_from", 16));
    Outcome o;
    o.report = res.report;
    o.extra = json::array();
    for (std::size_t k = 0; k < res.interaction.size(); ++k) {
        json row;
        row["k"] = res.report.grid[k];
        row["interaction"] = measured(res.interaction[k], 1e-9 * res.interaction[k]);
        row["free_part"] = measured(res.free_part[k], 1e-10);
        o.extra.push_back(row);
    }
    return o;
}

Outcome run_check_symmetry(const Config& c, const Setup& s, std::uint64_t seed) {
    Outcome o;
    const cplx e = c.complex("/task/energy", cplx(-5.0 * s.mass, 2.0 * s.mass));
    if (s.type == ModelType::nonrelativistic) {
        const CenterSet cs = make_centers(c, s);
        o.report = check_symmetry(s.manifold, cs, e, random_points(s.manifold, c.integer("/task/samples", 4, 2), seed));
    } else if (s.type == ModelType::relativistic) {
        const RelativisticModel model = make_relativistic(c, s);
        o.report = check_symmetry(model, spectral_basis(s.manifold, c.integer("/task/modes", 49)), e);
    } else {
        const LeeModelSpec spec = make_lee(c, s);
        require_compact(c, s, "the Lee model");
        const int modes = c.integer("/task/modes", 25), n_max = c.integer("/task/n_max", 2, 0);
        const int n = c.integer("/task/sector", 1, 0);
        if (n > n_max) c.fail("/task/sector", "must not exceed n_max");
        const LeePrincipalOperator op(spec, spectral_basis(s.manifold, modes), FockBasis(modes, n_max), n);
        if (!(e.real() < op.threshold())) c.fail("/task/energy", "Re(E) must lie below n m + mu");
        o.report = check_symmetry(op, e);
    }
    return o;
}

Outcome run_check_bounds(const Config& c, const Setup& s) {
    const std::string which = c.string("/task/bound");
    const auto sweep = c.numbers("/task/sweep", default_sweep());
    for (std::size_t k = 0; k < sweep.size(); ++k)
        if (!(sweep[k] > 0.0)) c.fail("/task/sweep/" + std::to_string(k), "|E| values must be positive");
    Outcome o;
    ConstantsRegistry reg;
    if (which == "heat" || which == "free-resolvent") reg.insert(s.manifold, calibrate_heat_bound(s.manifold));
    if (which == "alpha" || which == "phi-inverse") {
        require(c, s, ModelType::nonrelativistic, which);
        const CenterSet cs = make_centers(c, s);
        o.report = which == "alpha" ? check_alpha_scaling(s.manifold, cs, sweep) : check_phi_inverse_scaling(s.manifold, cs, sweep);
    } else if (which == "heat") {
        o.report = check_heat_bounds(s.manifold, reg);
    } else if (which == "jacobian") {
        if (s.manifold.dimension() != 2) c.fail("/geometry/dimension", "jacobian check needs a two-dimensional geometry");
        o.report = check_jacobian_bounds(s.manifold);
    } else if (which == "free-resolvent") {
        if (s.manifold.dimension() != 3) c.fail("/geometry/dimension", "free-resolvent bound needs D = 3");
        const Point a = reference_point(s.manifold);
        std::vector<Point> targets;
        const double ell = s.manifold.length_scale();
        for (double f : {0.1, 0.3, 0.6})
            targets.push_back(s.manifold.kind() == GeometryKind::FlatTorus ? torus_point(s.manifold, {f * ell, 0.5 * f * ell, 0.0})
                                                                           : flat_point(f * ell, 0.5 * f * ell, 0.0));
        o.report = check_free_resolvent_bound(s.manifold, reg, a, targets, sweep);
    } else if (which == "relativistic-phi-inverse") {
        o.report = check_relativistic_phi_inverse(make_relativistic(c, s), sweep);
    } else {
        c.fail("/task/bound", "expected alpha, phi-inverse, heat, jacobian, free-resolvent or relativistic-phi-inverse");
    }
    return o;
}

Outcome run_check_subordination(const Config& c, const Setup& s) {
    Outcome o;
    const auto ss = c.numbers("/task/s", std::vector<double>{0.5, 1.0, 3.0});
    const auto ls = c.numbers("/task/lambda", std::vector<double>{0.0, 1.0, 2.25});
    for (std::size_t k = 0; k < ss.size(); ++k)
        if (!(ss[k] > 0.0)) c.fail("/task/s/" + std::to_string(k), "must be positive");
    for (std::size_t k = 0; k < ls.size(); ++k)
        if (ls[k] < 0.0) c.fail("/task/lambda/" + std::to_string(k), "must be non-negative");
    o.report = check_subordination(s.mass, ss, ls, c.positive("/task/tolerance", 1e-9));
    return o;
}

Outcome run_check_decay(const Config& c, const Setup& s) {
    require(c, s, ModelType::relativistic, "check-decay");
    const RelativisticModel model = make_relativistic(c, s);
    const int center = c.integer("/task/center", 0, 0);
    if (center >= model.size()) c.fail("/task/center", "no such center");
    auto sweep = c.numbers("/task/sweep", std::vector<double>{1e2, 1e3, 1e4, 1e5, 1e6});
    for (auto& v : sweep) v *= s.mass;
    Outcome o;
    o.report = check_decay(model, center, sweep, c.positive("/task/window", 0.1));
    return o;
}

struct LeeTask {
    LeeModelSpec spec;
    int modes, n_max, n;
};

LeeTask lee_task(const Config& c, const Setup& s) {
    require(c, s, ModelType::lee, "this subcommand");
    require_compact(c, s, "the Lee model");
    LeeTask t{make_lee(c, s), c.integer("/task/modes", 25), c.integer("/task/n_max", 2, 0), c.integer("/task/sector", 1, 0)};
    if (t.n > t.n_max) c.fail("/task/sector", "must not exceed n_max");
    return t;
}

Outcome run_lee_spectrum(const Config& c, const Setup& s) {
    const LeeTask t = lee_task(c, s);
    const double th = t.spec.threshold(t.n);
    const auto w = c.numbers("/task/window", std::vector<double>{th - 20.0 * s.mass, th - 1e-9 * s.mass});
    if (w.size() != 2 || !(w[0] < w[1]) || !(w[1] < th)) c.fail("/task/window", "expected [lo, hi] with lo < hi < n m + mu");
    const auto basis = spectral_basis(s.manifold, t.modes);
    const auto g = ground_state_energy(t.spec, basis, t.modes, t.n_max, t.n, w[0], w[1], c.integer("/task/scan_points", 32, 4));
    Outcome o;
    BoundReport& r = o.report;
    r.check = "lee-spectrum";
    r.model = "lee";
    r.geometry = s.manifold.signature();
    r.sweep_variable = "sector";
    r.bound_provenance = "exact";
    r.notes = g.warnings;
    o.extra = json::array();
    if (!g.found) {
        r.verdict = Verdict::inconclusive;
        o.exit_code = Exit::no_root;
        return o;
    }
    const double tol = std::max(g.truncation_estimate, 1e-9 * std::max(1.0, std::abs(g.energy)));
    r.grid.push_back(t.n);
    r.values.push_back({g.energy, tol});
    json row;
    row["energy"] = measured(g.energy, tol);
    row["energy_half_modes"] = measured(g.energy_half_modes, 1e-9);
    row["energy_lower_n_max"] = measured(g.energy_lower_nmax, 1e-9);
    row["truncation_estimate"] = g.truncation_estimate;
    row["residual"] = measured(g.residual, 0.0);
    o.extra.push_back(row);
    r.verdict = Verdict::holds;
    return o;
}

Outcome run_lee_bounds(const Config& c, const Setup& s) {
    const LeeTask t = lee_task(c, s);
    const std::string which = c.string("/task/bound", std::string("ground-state"));
    const auto basis = spectral_basis(s.manifold, t.modes);
    const FockBasis fock(t.modes, t.n_max);
    Outcome o;
    if (which == "u1") {
        const LeePrincipalOperator op(t.spec, basis, fock, t.n);
        auto sweep = c.numbers("/task/sweep", std::vector<double>{1e2, 1e3, 1e4, 1e5, 1e6});
        for (auto& v : sweep) v *= s.mass;
        o.report = u1_tilde_bound_check(op, sweep);
        return o;
    }
    if (which == "relative") {
        if (t.n_max < 2) c.fail("/task/n_max", "the relative bound compares sectors 1 and 2");
        const LeePrincipalOperator op1(t.spec, basis, fock, 1), op2(t.spec, basis, fock, 2);
        const double mu = t.spec.mu();
        const auto energies = c.numbers("/task/energies", std::vector<double>{mu - 1e-3 * s.mass, mu - 1.0, mu - 10.0,
                                                                               mu - 100.0, mu - 1e3, mu - 1e4});
        for (std::size_t k = 0; k < energies.size(); ++k)
            if (energies[k] > mu - 1e-3 * s.mass) c.fail("/task/energies/" + std::to_string(k), "must satisfy E <= mu - 1e-3 m");
        o.report = relative_bound_check(op1, op2, energies);
        return o;
    }
    if (which != "ground-state") c.fail("/task/bound", "expected ground-state, u1 or relative");
    ConstantsRegistry reg;
    reg.insert(t.spec.manifold(), calibrate_heat_bound(t.spec.manifold()));
    const auto couplings = c.numbers("/task/couplings", std::vector<double>{0.1, 0.5, 1.0});
    for (std::size_t k = 0; k < couplings.size(); ++k)
        if (!(couplings[k] > 0.0)) c.fail("/task/couplings/" + std::to_string(k), "must be positive");
    if (!(t.spec.mu() > 0.0)) c.fail("/model/mu", "the ground-state bound needs mu > 0");
    try {
        o.report = check_lee_ground_state(t.spec, basis, t.modes, t.n_max, t.n, couplings, reg);
    } catch (const renorm::convergence_error& e) {
        o.report.check = "lee-ground-state-bound";
        o.report.model = "lee";
        o.report.geometry = s.manifold.signature();
        o.report.verdict = Verdict::inconclusive;
        o.report.notes.push_back(e.what());
        o.exit_code = Exit::no_root;
    }
    return o;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"renorm: renormalized point interactions on model manifolds"};
    app.require_subcommand(1);
    app.fallthrough();
    std::string config_path, output_path, format;
    int threads = 1;
    std::uint64_t seed = 20240601;
    app.add_option("--config", config_path, "run configuration (JSON)")->check(CLI::ExistingFile);
    app.add_option("--output", output_path, "report destination (default: output.path or stdout)");
    app.add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--threads", threads, "worker threads (results do not depend on it)")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "seed for randomized test functions and sample points");
    const std::vector<std::string> names{"spectrum",          "resolvent",          "check-identity", "check-limit",
                                         "check-symmetry",    "check-bounds",       "check-subordination",
                                         "check-decay",       "lee-spectrum",       "lee-bounds"};
    for (const auto& n : names) app.add_subcommand(n);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? Exit::ok : Exit::config_failure;
    }
    const std::string cmd = app.get_subcommands().front()->get_name();
    if (config_path.empty()) {
        std::cerr << "config error: --config is required\n";
        return Exit::config_failure;
    }

    Outcome o;
    json out;
    std::string fmt_name;
    std::string destination;
    std::string plot_prefix;
    try {
        std::ifstream in(config_path, std::ios::binary);
        std::stringstream buf;
        buf << in.rdbuf();
        const Config c(config_path, buf.str());
        const int version = c.integer("/schema_version", std::nullopt, 1);
        if (version != kSchemaVersion) c.fail("/schema_version", "unsupported schema version " + std::to_string(version));
        fmt_name = format.empty() ? c.string("/output/format", std::string("json")) : format;
        if (fmt_name != "json" && fmt_name != "csv") c.fail("/output/format", "expected json or csv");
        destination = output_path.empty() ? c.string("/output/path", std::string("")) : output_path;
        plot_prefix = c.string("/output/plot_data", std::string(""));
        const Setup s = make_setup(c);

        if (cmd == "spectrum") o = run_spectrum(c, s);
        else if (cmd == "resolvent") o = run_resolvent(c, s, seed);
        else if (cmd == "check-identity") o = run_check_identity(c, s, seed);
        else if (cmd == "check-limit") o = run_check_limit(c, s, seed);
        else if (cmd == "check-symmetry") o = run_check_symmetry(c, s, seed);
        else if (cmd == "check-bounds") o = run_check_bounds(c, s);
        else if (cmd == "check-subordination") o = run_check_subordination(c, s);
        else if (cmd == "check-decay") o = run_check_decay(c, s);
        else if (cmd == "lee-spectrum") o = run_lee_spectrum(c, s);
        else o = run_lee_bounds(c, s);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return Exit::config_failure;
    } catch (const renorm::domain_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return Exit::config_failure;
    } catch (const renorm::unsupported_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return Exit::config_failure;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return Exit::numerical_failure;
    }

    std::string text;
    if (fmt_name == "csv") {
        text = to_csv(o.report);
    } else {
        out = to_json(o.report);
        if (!o.extra.is_null()) out["rows"] = o.extra;
        text = out.dump(2) + "\n";
    }
    if (destination.empty()) {
        std::cout << text;
    } else {
        std::ofstream f(destination, std::ios::binary);
        if (!f) {
            std::cerr << "config error: cannot write " << destination << "\n";
            return Exit::config_failure;
        }
        f << text;
    }
    if (!plot_prefix.empty()) {
        try {
            write_plot_data(plot_prefix, o.report);
        } catch (const std::exception& e) {
            std::cerr << "config error: " << e.what() << "\n";
            return Exit::config_failure;
        }
    }
    if (o.exit_code != Exit::ok) return o.exit_code;
    if (o.report.verdict == Verdict::violated) return Exit::violated;
    return Exit::ok;
}
