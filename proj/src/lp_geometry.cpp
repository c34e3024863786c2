#include "fractv/lp_geometry.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "fractv/grid_ops.hpp"

namespace fractv {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Root of t + c t^{q-1} = a for a > 0, c > 0, 1 < q < inf. Newton from a point where the
// residual is positive stays above the root and converges monotonically. For q < 2 the
// iteration runs in y = t^{q-1}, where the equation y^{1/(q-1)} + c y = a is smooth.
// `hint` is used as the start when it lies above the root (0 = none).
double scalar_kkt(double a, double c, double q, double hint) {
    constexpr double eps = std::numeric_limits<double>::epsilon();
    if (q >= 2.0) {
        const double e = q - 1.0;
        double t = std::min(a, std::pow(a / c, 1.0 / e));
        if (hint > 0.0 && hint < t && hint + c * std::pow(hint, e) - a > 0.0) t = hint;
        for (int it = 0; it < 100; ++it) {
            const double te = std::pow(t, e - 1.0);
            const double g = t + c * te * t - a;
            if (g <= 0.0) break;
            const double step = g / (1.0 + c * e * te);
            t -= step;
            if (step <= 2.0 * eps * t) break;
        }
        return std::max(t, 0.0);
    }
    const double b = 1.0 / (q - 1.0);
    double y = std::min(a / c, std::pow(a, q - 1.0));
    if (hint > 0.0) {
        const double yh = std::pow(hint, q - 1.0);
        if (yh < y && hint + c * yh - a > 0.0) y = yh;
    }
    for (int it = 0; it < 100; ++it) {
        const double yb = std::pow(y, b - 1.0);
        const double g = yb * y + c * y - a;
        if (g <= 0.0) break;
        const double step = g / (b * yb + c);
        y -= step;
        if (step <= 2.0 * eps * y) break;
    }
    return std::pow(std::max(y, 0.0), b);
}

void project_general(std::span<double> v, double q, double radius, double* multiplier) {
    const std::size_t n = v.size();
    std::array<double, 64> small_a{}, small_t{};
    std::vector<double> big_a, big_t;
    double* a = small_a.data();
    double* t = small_t.data();
    if (n > small_a.size()) {
        big_a.resize(n);
        big_t.resize(n);
        a = big_a.data();
        t = big_t.data();
    }
    // Rescale so that the largest component is 1; the multiplier scales with it.
    double amax = 0.0;
    for (std::size_t i = 0; i < n; ++i) amax = std::max(amax, std::abs(v[i]));
    for (std::size_t i = 0; i < n; ++i) a[i] = std::abs(v[i]) / amax;
    const double R = radius / amax;
    const double target = std::pow(R, q);

    // phi(lambda) = sum t_i^q - R^q is convex and decreasing in lambda.
    auto evaluate = [&](double lambda, double& dphi) {
        double phi = -target;
        dphi = 0.0;
        const double c = lambda * q;
        for (std::size_t i = 0; i < n; ++i) {
            if (a[i] == 0.0) {
                t[i] = 0.0;
                continue;
            }
            // t decreases in lambda, so the previous iterate is a valid start after an increase
            t[i] = scalar_kkt(a[i], c, q, t[i]);
            if (t[i] <= 0.0) continue;
            const double tq1 = std::pow(t[i], q - 1.0);
            phi += tq1 * t[i];
            // dt/dlambda = -q t^{q-1} t / (t + c (q-1) t^{q-1})
            const double dt = -q * tq1 * t[i] / (t[i] + c * (q - 1.0) * tq1);
            dphi += q * tq1 * dt;
        }
        return phi;
    };

    // Multiplying the KKT system by t_i and summing gives
    // lambda = (sum a_i t_i - sum t_i^2) / (q R^q); evaluate it at the radial guess.
    double na = 0.0;
    for (std::size_t i = 0; i < n; ++i) na += std::pow(a[i], q);
    const double rho = R / std::pow(na, 1.0 / q);
    double num = 0.0;
    for (std::size_t i = 0; i < n; ++i) num += a[i] * a[i] * rho * (1.0 - rho);
    double lambda = std::max(num / (q * target), std::numeric_limits<double>::min());
    // The multiplier of the unscaled problem is lambda * amax^{2-q}.
    if (multiplier && *multiplier > 0.0) lambda = *multiplier * std::pow(amax, q - 2.0);

    double lo = 0.0, hi = kInf, dphi = 0.0;
    const double tol = 1e-13 * target;
    for (int it = 0; it < 200; ++it) {
        const double phi = evaluate(lambda, dphi);
        if (std::abs(phi) <= tol) break;
        if (phi > 0.0) lo = lambda; else hi = lambda;
        if (std::isfinite(hi) && hi - lo <= 1e-16 * hi) break;
        double next = dphi < 0.0 ? lambda - phi / dphi : kInf;
        if (!(next > lo && next < hi) || !std::isfinite(next)) {
            next = std::isfinite(hi) ? 0.5 * (lo + hi) : 4.0 * lambda;
        }
        lambda = next;
    }
    if (multiplier) *multiplier = lambda * std::pow(amax, 2.0 - q);
    // Land exactly inside the ball so that a second projection is the identity.
    double norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) norm += std::pow(t[i], q);
    norm = std::pow(norm, 1.0 / q);
    const double shrink = norm > R ? R / norm : 1.0;
    for (std::size_t i = 0; i < n; ++i) v[i] = std::copysign(t[i] * shrink * amax, v[i]);
}

void project_l1(std::span<double> v, double radius) {
    const std::size_t n = v.size();
    std::vector<double> a(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = std::abs(v[i]);
    std::sort(a.begin(), a.end(), std::greater<>());
    double cumulative = 0.0, theta = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cumulative += a[i];
        const double candidate = (cumulative - radius) / static_cast<double>(i + 1);
        if (a[i] - candidate > 0.0) theta = candidate;
    }
    for (double& x : v) x = std::copysign(std::max(std::abs(x) - theta, 0.0), x);
}

}  // namespace

LpExponent::LpExponent(double p) : p_(p) {
    if (std::isnan(p) || p < 1.0) throw std::invalid_argument("LpExponent: p must be >= 1");
}

LpExponent LpExponent::infinity() { return LpExponent(kInf); }

bool LpExponent::is_infinite() const { return std::isinf(p_); }

LpExponent LpExponent::dual() const {
    if (p_ == 1.0) return infinity();
    if (is_infinite()) return LpExponent(1.0);
    return LpExponent(p_ / (p_ - 1.0));
}

LpExponent LpExponent::parse(const std::string& text) {
    if (text == "inf" || text == "infinity" || text == "Inf") return infinity();
    double value = 0.0;
    const char* first = text.data();
    const char* last = first + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last) {
        throw std::invalid_argument("LpExponent: cannot parse '" + text + "'");
    }
    return LpExponent(value);
}

std::string LpExponent::to_string() const {
    if (is_infinite()) return "inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", p_);
    return buf;
}

LpExponent dual_exponent(LpExponent p) { return p.dual(); }

double lp_norm(std::span<const double> v, LpExponent p) {
    if (v.empty()) throw std::invalid_argument("lp_norm: empty vector");
    if (p.is_infinite()) {
        double m = 0.0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    }
    const double e = p.value();
    if (e == 1.0) {
        double s = 0.0;
        for (double x : v) s += std::abs(x);
        return s;
    }
    if (e == 2.0) {
        double s = 0.0;
        for (double x : v) s += x * x;
        return std::sqrt(s);
    }
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    if (m == 0.0) return 0.0;
    double s = 0.0;
    for (double x : v) s += std::pow(std::abs(x) / m, e);
    return m * std::pow(s, 1.0 / e);
}

void project_ball_inplace(std::span<double> v, LpExponent p, double radius) {
    project_ball_inplace(v, p, radius, nullptr);
}

void project_ball_inplace(std::span<double> v, LpExponent p, double radius, double* multiplier) {
    if (!(radius > 0.0)) throw std::invalid_argument("project_ball: radius must be positive");
    if (v.empty()) return;
    if (p.is_infinite()) {
        for (double& x : v) x = std::clamp(x, -radius, radius);
        return;
    }
    const double norm = lp_norm(v, p);
    if (norm <= radius) return;
    const double e = p.value();
    if (e == 2.0) {
        const double f = radius / norm;
        for (double& x : v) x *= f;
    } else if (e == 1.0) {
        project_l1(v, radius);
    } else {
        project_general(v, e, radius, multiplier);
    }
}

std::vector<double> project_ball(std::span<const double> v, LpExponent p, double radius) {
    std::vector<double> out(v.begin(), v.end());
    project_ball_inplace(out, p, radius);
    return out;
}

double mixed_mass(const VectorField& field, LpExponent p) {
    const std::size_t sites = field.plane_size();
    const int channels = field.channels();
    std::vector<double> buf(channels);
    double total = 0.0;
    for (std::size_t x = 0; x < sites; ++x) {
        for (int c = 0; c < channels; ++c) buf[c] = field.at(c, x);
        total += lp_norm(buf, p);
    }
    const double h = field.spacing();
    return h * h * total;
}

}  // namespace fractv
