#pragma once

// One-dimensional discrete Riemann-Liouville operators of Grunwald-Letnikov type.
//
// Grid convention: n samples at x_i = i*h on the unit interval, h = 1/(n-1). Wherever a
// fractional stencil reaches past either end, the signal is treated as zero.

#include <cstddef>
#include <span>
#include <vector>

namespace fractv {

/// Order r = k + s with k = floor(r) and 0 <= s < 1.
class FracOrder {
public:
    FracOrder() = default;
    explicit FracOrder(double r);

    double value() const { return r_; }
    int integer_part() const { return k_; }
    double fractional_part() const { return s_; }
    bool is_integer() const { return s_ == 0.0; }

private:
    double r_ = 0.0;
    int k_ = 0;
    double s_ = 0.0;
};

enum class Side { left, right, central };

struct GlWeights {
    double order = 0.0;
    std::vector<double> weights;
};

struct Signal1D {
    std::vector<double> samples;
    double h = 1.0;

    /// Samples on the closed unit interval, h = 1/(n-1).
    static Signal1D on_unit_interval(std::vector<double> samples);
};

/// Boundary values of the affine interpolant e(x) = a(1-x) + b x.
struct AffineTrace {
    double a = 0.0;
    double b = 0.0;
};

struct ReducedSignal {
    Signal1D signal;
    AffineTrace trace;
};

/// w_j = (-1)^j binom(order, j), via w_0 = 1, w_j = w_{j-1} (j-1-order)/j.
GlWeights gl_weights(double order, std::size_t length);

/// Same recursion without the sign restriction on order; negative orders give the
/// fractional integration weights.
std::vector<double> gl_recursion(double order, std::size_t length);

Signal1D frac_deriv(const Signal1D& signal, FracOrder order, Side side = Side::left);
Signal1D frac_integral(const Signal1D& signal, double order, Side side = Side::left);

/// Gamma function for x > 0.
double gamma_fn(double x);

ReducedSignal boundary_reduce(const Signal1D& signal);
Signal1D boundary_restore(const Signal1D& reduced, const AffineTrace& trace);

namespace line {

// Kernels on raw contiguous lines, shared by the 2D sweeps. `out` must not alias `in`.

/// out = left-sided derivative of order `order` (integer part first, then the GL sum).
void deriv_left(std::span<const double> in, std::span<double> out, FracOrder order, double h);
/// Mirror image of deriv_left; equals its transpose.
void deriv_right(std::span<const double> in, std::span<double> out, FracOrder order, double h);

/// Plain causal convolution out_i = scale * sum_{j<=i} w_j in_{i-j}.
void convolve_left(std::span<const double> in, std::span<double> out,
                   std::span<const double> weights, double scale);
void convolve_right(std::span<const double> in, std::span<double> out,
                    std::span<const double> weights, double scale);

}  // namespace line

}  // namespace fractv
