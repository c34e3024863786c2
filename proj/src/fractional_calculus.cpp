#include "fractv/fractional_calculus.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fractv {

namespace {

void require_finite(std::span<const double> v, const char* what) {
    for (double x : v) {
        if (!std::isfinite(x)) {
            throw std::invalid_argument(std::string(what) + ": nonfinite sample");
        }
    }
}

void require_signal(const Signal1D& s, const char* what) {
    if (s.samples.empty()) {
        throw std::invalid_argument(std::string(what) + ": empty signal");
    }
    if (!(s.h > 0.0) || !std::isfinite(s.h)) {
        throw std::invalid_argument(std::string(what) + ": spacing must be positive");
    }
    require_finite(s.samples, what);
}

// One backward difference (x_i - x_{i-1}) / h with x_{-1} = 0.
void backward_difference(std::span<const double> in, std::span<double> out, double h) {
    const std::size_t n = in.size();
    if (n == 0) return;
    out[0] = in[0] / h;
    for (std::size_t i = n - 1; i >= 1; --i) out[i] = (in[i] - in[i - 1]) / h;
}

// Mirror of backward_difference: (x_i - x_{i+1}) / h with x_n = 0.
void forward_mirror_difference(std::span<const double> in, std::span<double> out, double h) {
    const std::size_t n = in.size();
    if (n == 0) return;
    for (std::size_t i = 0; i + 1 < n; ++i) out[i] = (in[i] - in[i + 1]) / h;
    out[n - 1] = in[n - 1] / h;
}

template <class Diff, class Conv>
void apply_factored(std::span<const double> in, std::span<double> out, FracOrder order, double h,
                    Diff diff, Conv conv) {
    const std::size_t n = in.size();
    const int k = order.integer_part();
    const double s = order.fractional_part();
    if (k == 0 && s == 0.0) {
        std::copy(in.begin(), in.end(), out.begin());
        return;
    }
    std::vector<double> a(in.begin(), in.end());
    std::vector<double> b(n);
    for (int step = 0; step < k; ++step) {
        diff(std::span<const double>(a), std::span<double>(b), h);
        a.swap(b);
    }
    if (s > 0.0) {
        const std::vector<double> w = gl_recursion(s, n);
        conv(std::span<const double>(a), out, std::span<const double>(w), std::pow(h, -s));
    } else {
        std::copy(a.begin(), a.end(), out.begin());
    }
}

}  // namespace

FracOrder::FracOrder(double r) : r_(r) {
    if (!std::isfinite(r) || r < 0.0) {
        throw std::invalid_argument("FracOrder: order must be finite and nonnegative");
    }
    const double fl = std::floor(r);
    k_ = static_cast<int>(fl);
    s_ = r - fl;
}

Signal1D Signal1D::on_unit_interval(std::vector<double> samples) {
    if (samples.size() < 2) {
        throw std::invalid_argument("Signal1D: at least two samples required");
    }
    const double h = 1.0 / static_cast<double>(samples.size() - 1);
    return Signal1D{std::move(samples), h};
}

std::vector<double> gl_recursion(double order, std::size_t length) {
    std::vector<double> w(length);
    if (length == 0) return w;
    w[0] = 1.0;
    for (std::size_t j = 1; j < length; ++j) {
        const double jd = static_cast<double>(j);
        w[j] = w[j - 1] * (jd - 1.0 - order) / jd;
    }
    return w;
}

GlWeights gl_weights(double order, std::size_t length) {
    if (!std::isfinite(order) || order < 0.0) {
        throw std::invalid_argument("gl_weights: order must be nonnegative (use frac_integral)");
    }
    if (length == 0) {
        throw std::invalid_argument("gl_weights: length must be positive");
    }
    return GlWeights{order, gl_recursion(order, length)};
}

namespace line {

void convolve_left(std::span<const double> in, std::span<double> out,
                   std::span<const double> weights, double scale) {
    const std::size_t n = in.size();
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j <= i; ++j) acc += weights[j] * in[i - j];
        out[i] = scale * acc;
    }
}

void convolve_right(std::span<const double> in, std::span<double> out,
                    std::span<const double> weights, double scale) {
    const std::size_t n = in.size();
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; i + j < n; ++j) acc += weights[j] * in[i + j];
        out[i] = scale * acc;
    }
}

void deriv_left(std::span<const double> in, std::span<double> out, FracOrder order, double h) {
    apply_factored(in, out, order, h, backward_difference, convolve_left);
}

void deriv_right(std::span<const double> in, std::span<double> out, FracOrder order, double h) {
    apply_factored(in, out, order, h, forward_mirror_difference, convolve_right);
}

}  // namespace line

Signal1D frac_deriv(const Signal1D& signal, FracOrder order, Side side) {
    require_signal(signal, "frac_deriv");
    const std::size_t n = signal.samples.size();
    Signal1D out{std::vector<double>(n), signal.h};
    switch (side) {
        case Side::left:
            line::deriv_left(signal.samples, out.samples, order, signal.h);
            break;
        case Side::right:
            line::deriv_right(signal.samples, out.samples, order, signal.h);
            break;
        case Side::central: {
            std::vector<double> l(n), r(n);
            line::deriv_left(signal.samples, l, order, signal.h);
            line::deriv_right(signal.samples, r, order, signal.h);
            // (-1)^{k+1}
            const double sign = (order.integer_part() % 2 == 0) ? -1.0 : 1.0;
            for (std::size_t i = 0; i < n; ++i) out.samples[i] = 0.5 * (l[i] + sign * r[i]);
            break;
        }
    }
    return out;
}

Signal1D frac_integral(const Signal1D& signal, double order, Side side) {
    if (!std::isfinite(order) || order <= 0.0) {
        throw std::invalid_argument("frac_integral: order must be positive");
    }
    if (side == Side::central) {
        throw std::invalid_argument("frac_integral: only left and right integrals are defined");
    }
    require_signal(signal, "frac_integral");
    const std::size_t n = signal.samples.size();
    const std::vector<double> w = gl_recursion(-order, n);
    Signal1D out{std::vector<double>(n), signal.h};
    const double scale = std::pow(signal.h, order);
    if (side == Side::left) {
        line::convolve_left(signal.samples, out.samples, w, scale);
    } else {
        line::convolve_right(signal.samples, out.samples, w, scale);
    }
    return out;
}

double gamma_fn(double x) {
    if (!(x > 0.0) || !std::isfinite(x)) {
        throw std::invalid_argument("gamma_fn: argument must be positive");
    }
    return std::tgamma(x);
}

ReducedSignal boundary_reduce(const Signal1D& signal) {
    if (signal.samples.size() < 2) {
        throw std::invalid_argument("boundary_reduce: at least two samples required");
    }
    require_finite(signal.samples, "boundary_reduce");
    const std::size_t n = signal.samples.size();
    const AffineTrace trace{signal.samples.front(), signal.samples.back()};
    ReducedSignal out{Signal1D{std::vector<double>(n), signal.h}, trace};
    const double last = static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = static_cast<double>(i) / last;
        out.signal.samples[i] = signal.samples[i] - (trace.a * (1.0 - x) + trace.b * x);
    }
    out.signal.samples.front() = 0.0;
    out.signal.samples.back() = 0.0;
    return out;
}

Signal1D boundary_restore(const Signal1D& reduced, const AffineTrace& trace) {
    if (reduced.samples.size() < 2) {
        throw std::invalid_argument("boundary_restore: at least two samples required");
    }
    const std::size_t n = reduced.samples.size();
    Signal1D out{std::vector<double>(n), reduced.h};
    const double last = static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = static_cast<double>(i) / last;
        out.samples[i] = reduced.samples[i] + (trace.a * (1.0 - x) + trace.b * x);
    }
    return out;
}

}  // namespace fractv
