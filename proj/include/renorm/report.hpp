#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "renorm/errors.hpp"

namespace renorm {

enum class Verdict { holds, holds_with_calibration, violated, inconclusive };

inline std::string to_string(Verdict v) {
    switch (v) {
    case Verdict::holds: return "holds";
    case Verdict::holds_with_calibration: return "holds_with_calibration";
    case Verdict::violated: return "violated";
    case Verdict::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

/// A computed number together with its absolute numerical uncertainty.
struct Measured {
    double value = 0.0;
    double tolerance = 0.0;
};

struct ExponentFit {
    double slope = 0.0;
    double intercept = 0.0;
    double error = 0.0; ///< standard error of the slope
    int points = 0;
};

/// Least-squares line through (ln x, ln |y|).
inline ExponentFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw domain_error("fit_loglog: need at least two points");
    const std::size_t n = x.size();
    std::vector<double> lx(n), ly(n);
    for (std::size_t k = 0; k < n; ++k) {
        if (!(x[k] > 0.0) || y[k] == 0.0) throw domain_error("fit_loglog: non-positive abscissa or zero value");
        lx[k] = std::log(x[k]);
        ly[k] = std::log(std::abs(y[k]));
    }
    double mx = 0, my = 0;
    for (std::size_t k = 0; k < n; ++k) mx += lx[k], my += ly[k];
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < n; ++k) {
        sxx += (lx[k] - mx) * (lx[k] - mx);
        sxy += (lx[k] - mx) * (ly[k] - my);
    }
    ExponentFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    f.points = static_cast<int>(n);
    if (n > 2) {
        double ss = 0;
        for (std::size_t k = 0; k < n; ++k) {
            const double r = ly[k] - f.intercept - f.slope * lx[k];
            ss += r * r;
        }
        f.error = std::sqrt(ss / (n - 2) / sxx);
    }
    return f;
}

struct BoundReport {
    std::string check;
    std::string model;
    std::string geometry;
    std::string sweep_variable;
    std::vector<double> grid;
    std::vector<Measured> values;
    std::vector<Measured> bound;           ///< empty when the check has no bound form
    std::string bound_provenance;           ///< "exact", "calibrated", ...
    std::optional<ExponentFit> exponent_fit;
    std::optional<double> expected_exponent;
    double exponent_window = 0.0;
    Verdict verdict = Verdict::inconclusive;
    std::vector<std::string> notes;
};

/// violated iff some value exceeds its bound by more than the combined tolerance.
inline bool bound_violated(const BoundReport& r) {
    for (std::size_t k = 0; k < r.bound.size() && k < r.values.size(); ++k)
        if (r.values[k].value - r.bound[k].value > r.values[k].tolerance + r.bound[k].tolerance) return true;
    return false;
}

/// Verdict from the bound comparison and, when present, the exponent window.
inline Verdict bound_verdict(const BoundReport& r) {
    if (bound_violated(r)) return Verdict::violated;
    if (r.exponent_fit && r.expected_exponent &&
        std::abs(r.exponent_fit->slope - *r.expected_exponent) > r.exponent_window + r.exponent_fit->error)
        return Verdict::violated;
    return r.bound_provenance == "exact" ? Verdict::holds : Verdict::holds_with_calibration;
}

} // namespace renorm
