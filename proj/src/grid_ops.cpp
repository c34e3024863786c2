#include "fractv/grid_ops.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "fractv/parallel.hpp"

namespace fractv {

Image::Image(int width, int height, double spacing)
    : Image(width, height, spacing,
            std::vector<double>(static_cast<std::size_t>(std::max(width, 0)) *
                                static_cast<std::size_t>(std::max(height, 0)))) {}

Image::Image(int width, int height, double spacing, std::vector<double> samples)
    : width_(width), height_(height), h_(spacing), samples_(std::move(samples)) {
    if (width <= 0 || height <= 0) throw std::invalid_argument("Image: dimensions must be positive");
    if (!(spacing > 0.0) || !std::isfinite(spacing)) {
        throw std::invalid_argument("Image: spacing must be positive");
    }
    if (samples_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw std::invalid_argument("Image: sample count does not match dimensions");
    }
    for (double v : samples_) {
        if (!std::isfinite(v)) throw std::invalid_argument("Image: nonfinite sample");
    }
}

VectorField::VectorField(int width, int height, double spacing, int channels)
    : width_(width), height_(height), h_(spacing), channels_(channels) {
    if (width <= 0 || height <= 0) {
        throw std::invalid_argument("VectorField: dimensions must be positive");
    }
    if (channels <= 0) throw std::invalid_argument("VectorField: channel count must be positive");
    data_.assign(static_cast<std::size_t>(channels) * plane_size(), 0.0);
}

AxisStencil::AxisStencil(FracOrder order_, Side side_, double h_, std::size_t max_length)
    : order(order_), side(side_), h(h_),
      weights(order_.fractional_part() > 0.0 ? gl_recursion(order_.fractional_part(), max_length)
                                             : std::vector<double>{}),
      scale(order_.fractional_part() > 0.0 ? std::pow(h_, -order_.fractional_part()) : 1.0) {}

namespace {

double central_sign(FracOrder order) { return order.integer_part() % 2 == 0 ? -1.0 : 1.0; }

// ---- sweeps along x: contiguous rows ------------------------------------------------------

void row_left(const double* in, double* out, int n, const AxisStencil& st, std::vector<double>& a,
              std::vector<double>& b) {
    a.assign(in, in + n);
    b.resize(n);
    for (int t = 0; t < st.order.integer_part(); ++t) {
        b[0] = a[0] / st.h;
        for (int i = n - 1; i >= 1; --i) b[i] = (a[i] - a[i - 1]) / st.h;
        a.swap(b);
    }
    if (st.weights.empty()) {
        std::copy(a.begin(), a.end(), out);
        return;
    }
    const double* w = st.weights.data();
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = 0; j <= i; ++j) acc += w[j] * a[i - j];
        out[i] = st.scale * acc;
    }
}

void row_right(const double* in, double* out, int n, const AxisStencil& st,
               std::vector<double>& a, std::vector<double>& b) {
    a.assign(in, in + n);
    b.resize(n);
    for (int t = 0; t < st.order.integer_part(); ++t) {
        for (int i = 0; i + 1 < n; ++i) b[i] = (a[i] - a[i + 1]) / st.h;
        b[n - 1] = a[n - 1] / st.h;
        a.swap(b);
    }
    if (st.weights.empty()) {
        std::copy(a.begin(), a.end(), out);
        return;
    }
    const double* w = st.weights.data();
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = 0; i + j < n; ++j) acc += w[j] * a[i + j];
        out[i] = st.scale * acc;
    }
}

void sweep_x(std::span<const double> in, std::span<double> out, int width, int height,
             const AxisStencil& st, Side side) {
    const double sign = central_sign(st.order);
    const bool par = parallel_worthwhile(in.size());
#pragma omp parallel if (par)
    {
        std::vector<double> a, b, l(width), r(width);
#pragma omp for schedule(static)
        for (int row = 0; row < height; ++row) {
            const double* src = in.data() + static_cast<std::size_t>(row) * width;
            double* dst = out.data() + static_cast<std::size_t>(row) * width;
            if (side == Side::left) {
                row_left(src, dst, width, st, a, b);
            } else if (side == Side::right) {
                row_right(src, dst, width, st, a, b);
            } else {
                row_left(src, l.data(), width, st, a, b);
                row_right(src, r.data(), width, st, a, b);
                for (int j = 0; j < width; ++j) dst[j] = 0.5 * (l[j] + sign * r[j]);
            }
        }
    }
}

// ---- sweeps along y: whole rows at a time --------------------------------------------------

void plane_left_y(std::span<const double> in, std::span<double> out, int width, int height,
                  const AxisStencil& st, bool par) {
    const std::size_t w = static_cast<std::size_t>(width);
    std::vector<double> a(in.begin(), in.end()), b(in.size());
    for (int t = 0; t < st.order.integer_part(); ++t) {
#pragma omp parallel for schedule(static) if (par)
        for (int i = 0; i < height; ++i) {
            double* dst = b.data() + i * w;
            const double* cur = a.data() + i * w;
            if (i == 0) {
                for (std::size_t j = 0; j < w; ++j) dst[j] = cur[j] / st.h;
            } else {
                const double* prev = cur - w;
                for (std::size_t j = 0; j < w; ++j) dst[j] = (cur[j] - prev[j]) / st.h;
            }
        }
        a.swap(b);
    }
    if (st.weights.empty()) {
        std::copy(a.begin(), a.end(), out.begin());
        return;
    }
    const double* wt = st.weights.data();
#pragma omp parallel if (par)
    {
        std::vector<double> acc(w);
#pragma omp for schedule(static)
        for (int i = 0; i < height; ++i) {
            std::fill(acc.begin(), acc.end(), 0.0);
            for (int l = 0; l <= i; ++l) {
                const double* src = a.data() + (i - l) * w;
                const double wl = wt[l];
                for (std::size_t j = 0; j < w; ++j) acc[j] += wl * src[j];
            }
            double* dst = out.data() + i * w;
            for (std::size_t j = 0; j < w; ++j) dst[j] = st.scale * acc[j];
        }
    }
}

void plane_right_y(std::span<const double> in, std::span<double> out, int width, int height,
                   const AxisStencil& st, bool par) {
    const std::size_t w = static_cast<std::size_t>(width);
    std::vector<double> a(in.begin(), in.end()), b(in.size());
    for (int t = 0; t < st.order.integer_part(); ++t) {
#pragma omp parallel for schedule(static) if (par)
        for (int i = 0; i < height; ++i) {
            double* dst = b.data() + i * w;
            const double* cur = a.data() + i * w;
            if (i == height - 1) {
                for (std::size_t j = 0; j < w; ++j) dst[j] = cur[j] / st.h;
            } else {
                const double* next = cur + w;
                for (std::size_t j = 0; j < w; ++j) dst[j] = (cur[j] - next[j]) / st.h;
            }
        }
        a.swap(b);
    }
    if (st.weights.empty()) {
        std::copy(a.begin(), a.end(), out.begin());
        return;
    }
    const double* wt = st.weights.data();
#pragma omp parallel if (par)
    {
        std::vector<double> acc(w);
#pragma omp for schedule(static)
        for (int i = 0; i < height; ++i) {
            std::fill(acc.begin(), acc.end(), 0.0);
            for (int l = 0; i + l < height; ++l) {
                const double* src = a.data() + (i + l) * w;
                const double wl = wt[l];
                for (std::size_t j = 0; j < w; ++j) acc[j] += wl * src[j];
            }
            double* dst = out.data() + i * w;
            for (std::size_t j = 0; j < w; ++j) dst[j] = st.scale * acc[j];
        }
    }
}

void sweep_y(std::span<const double> in, std::span<double> out, int width, int height,
             const AxisStencil& st, Side side) {
    const bool par = parallel_worthwhile(in.size());
    if (side == Side::left) {
        plane_left_y(in, out, width, height, st, par);
    } else if (side == Side::right) {
        plane_right_y(in, out, width, height, st, par);
    } else {
        std::vector<double> l(in.size()), r(in.size());
        plane_left_y(in, l, width, height, st, par);
        plane_right_y(in, r, width, height, st, par);
        const double sign = central_sign(st.order);
        for (std::size_t i = 0; i < in.size(); ++i) out[i] = 0.5 * (l[i] + sign * r[i]);
    }
}

// Central transpose: 1/2 [R + sign L].
void combine_central_transpose(std::span<const double> in, std::span<double> out,
                               const std::vector<double>& l, const std::vector<double>& r,
                               double sign) {
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = 0.5 * (r[i] + sign * l[i]);
}

Side effective_side(Side side, bool transpose) {
    if (!transpose) return side;
    if (side == Side::left) return Side::right;
    if (side == Side::right) return Side::left;
    return Side::central;
}

void require_plane(std::span<const double> in, std::span<double> out, int width, int height) {
    const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    if (in.size() != n || out.size() != n) {
        throw std::invalid_argument("sweep: plane size mismatch");
    }
}

}  // namespace

namespace kernels {

void sweep(std::span<const double> in, std::span<double> out, int width, int height, Axis axis,
           const AxisStencil& stencil, bool transpose) {
    require_plane(in, out, width, height);
    const Side side = effective_side(stencil.side, transpose);
    if (transpose && stencil.side == Side::central) {
        std::vector<double> l(in.size()), r(in.size());
        AxisStencil tmp = stencil;
        tmp.side = Side::left;
        sweep(in, l, width, height, axis, tmp, false);
        tmp.side = Side::right;
        sweep(in, r, width, height, axis, tmp, false);
        combine_central_transpose(in, out, l, r, central_sign(stencil.order));
        return;
    }
    if (axis == Axis::x) {
        sweep_x(in, out, width, height, stencil, side);
    } else {
        sweep_y(in, out, width, height, stencil, side);
    }
}

namespace serial {

void sweep(std::span<const double> in, std::span<double> out, int width, int height, Axis axis,
           const AxisStencil& stencil, bool transpose) {
    require_plane(in, out, width, height);
    const int lines = axis == Axis::x ? height : width;
    const int len = axis == Axis::x ? width : height;
    const double sign = central_sign(stencil.order);
    std::vector<double> buf(len), l(len), r(len);
    for (int q = 0; q < lines; ++q) {
        auto index = [&](int t) {
            return axis == Axis::x ? static_cast<std::size_t>(q) * width + t
                                   : static_cast<std::size_t>(t) * width + q;
        };
        for (int t = 0; t < len; ++t) buf[t] = in[index(t)];
        line::deriv_left(buf, l, stencil.order, stencil.h);
        line::deriv_right(buf, r, stencil.order, stencil.h);
        for (int t = 0; t < len; ++t) {
            double v;
            switch (effective_side(stencil.side, transpose)) {
                case Side::left: v = l[t]; break;
                case Side::right: v = r[t]; break;
                default:
                    v = transpose ? 0.5 * (r[t] + sign * l[t]) : 0.5 * (l[t] + sign * r[t]);
            }
            out[index(t)] = v;
        }
    }
}

}  // namespace serial
}  // namespace kernels

// ---- operators -----------------------------------------------------------------------------

FracGradOp::FracGradOp(int width, int height, double h, FracOrder order, Side side)
    : width_(width), height_(height),
      plane_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height)),
      stencil_x_(order, side, h, static_cast<std::size_t>(width)),
      stencil_y_(order, side, h, static_cast<std::size_t>(height)) {}

void FracGradOp::apply(std::span<const double> in, std::span<double> out) const {
    kernels::sweep(in, out.subspan(0, plane_), width_, height_, Axis::x, stencil_x_, false);
    kernels::sweep(in, out.subspan(plane_, plane_), width_, height_, Axis::y, stencil_y_, false);
}

void FracGradOp::apply_adjoint(std::span<const double> in, std::span<double> out) const {
    std::vector<double> tmp(plane_);
    kernels::sweep(in.subspan(0, plane_), out, width_, height_, Axis::x, stencil_x_, true);
    kernels::sweep(in.subspan(plane_, plane_), tmp, width_, height_, Axis::y, stencil_y_, true);
    for (std::size_t i = 0; i < plane_; ++i) out[i] += tmp[i];
}

std::string FracGradOp::describe() const {
    const char* side = stencil_x_.side == Side::left    ? "left"
                       : stencil_x_.side == Side::right ? "right"
                                                        : "central";
    return "frac_grad(r=" + std::to_string(stencil_x_.order.value()) + ", " + side + ")";
}

IntegerGradOp::IntegerGradOp(int width, int height, double h, int m)
    : width_(width), height_(height), m_(m),
      plane_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height)),
      grad_(width, height, h, FracOrder(1.0), Side::left) {
    if (m < 1 || m > 4) throw std::invalid_argument("integer_grad_power: m must be in 1..4");
}

void IntegerGradOp::apply(std::span<const double> in, std::span<double> out) const {
    std::vector<double> cur(in.begin(), in.end());
    std::vector<double> next;
    for (int level = 0; level < m_; ++level) {
        const std::size_t planes = std::size_t{1} << level;
        next.assign(2 * planes * plane_, 0.0);
        for (std::size_t c = 0; c < planes; ++c) {
            grad_.apply(std::span<const double>(cur).subspan(c * plane_, plane_),
                        std::span<double>(next).subspan(2 * c * plane_, 2 * plane_));
        }
        cur.swap(next);
    }
    std::copy(cur.begin(), cur.end(), out.begin());
}

void IntegerGradOp::apply_adjoint(std::span<const double> in, std::span<double> out) const {
    std::vector<double> cur(in.begin(), in.end());
    std::vector<double> next;
    for (int level = m_ - 1; level >= 0; --level) {
        const std::size_t planes = std::size_t{1} << level;
        next.assign(planes * plane_, 0.0);
        for (std::size_t c = 0; c < planes; ++c) {
            grad_.apply_adjoint(std::span<const double>(cur).subspan(2 * c * plane_, 2 * plane_),
                                std::span<double>(next).subspan(c * plane_, plane_));
        }
        cur.swap(next);
    }
    std::copy(cur.begin(), cur.end(), out.begin());
}

std::string IntegerGradOp::describe() const { return "grad^" + std::to_string(m_); }

BlockDiagonalOp::BlockDiagonalOp(std::shared_ptr<const LinearOp> inner, int copies)
    : inner_(std::move(inner)), copies_(copies) {
    if (!inner_ || copies <= 0) throw std::invalid_argument("BlockDiagonalOp: invalid arguments");
}

void BlockDiagonalOp::apply(std::span<const double> in, std::span<double> out) const {
    const std::size_t ni = inner_->input_size(), no = inner_->output_size();
    for (int c = 0; c < copies_; ++c) {
        inner_->apply(in.subspan(c * ni, ni), out.subspan(c * no, no));
    }
}

void BlockDiagonalOp::apply_adjoint(std::span<const double> in, std::span<double> out) const {
    const std::size_t ni = inner_->input_size(), no = inner_->output_size();
    for (int c = 0; c < copies_; ++c) {
        inner_->apply_adjoint(in.subspan(c * no, no), out.subspan(c * ni, ni));
    }
}

std::string BlockDiagonalOp::describe() const {
    return std::to_string(copies_) + " x " + inner_->describe();
}

void IdentityOp::apply(std::span<const double> in, std::span<double> out) const {
    std::copy(in.begin(), in.end(), out.begin());
}

void IdentityOp::apply_adjoint(std::span<const double> in, std::span<double> out) const {
    std::copy(in.begin(), in.end(), out.begin());
}

// ---- free functions ------------------------------------------------------------------------

double divergence_scale(FracOrder order) {
    constexpr double n = 2.0;
    double s = order.fractional_part();
    if (order.is_integer() && order.integer_part() > 0) s = 1.0;
    return (1.0 - 1.0 / n) * s + 1.0 / n;
}

VectorField frac_grad(const Image& image, FracOrder order, Side side) {
    VectorField out(image.width(), image.height(), image.spacing(), 2);
    FracGradOp op(image.width(), image.height(), image.spacing(), order, side);
    op.apply(image.samples(), out.data());
    return out;
}

Image frac_div_raw(const VectorField& field, FracOrder order) {
    if (field.channels() != 2) throw std::invalid_argument("frac_div: field must have 2 channels");
    FracGradOp op(field.width(), field.height(), field.spacing(), order, Side::left);
    Image out(field.width(), field.height(), field.spacing());
    op.apply_adjoint(field.data(), out.samples());
    for (double& v : out.samples()) v = -v;
    return out;
}

Image frac_div(const VectorField& field, FracOrder order) {
    Image out = frac_div_raw(field, order);
    const double c = divergence_scale(order);
    for (double& v : out.samples()) v *= c;
    return out;
}

VectorField integer_grad_power(const Image& image, int m) {
    IntegerGradOp op(image.width(), image.height(), image.spacing(), m);
    VectorField out(image.width(), image.height(), image.spacing(), 1 << m);
    op.apply(image.samples(), out.data());
    return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double operator_norm(const LinearOp& op, int iters, std::uint64_t seed) {
    if (iters < 1) throw std::invalid_argument("operator_norm: iters must be positive");
    const std::size_t n = op.input_size();
    std::mt19937_64 rng(seed);
    std::vector<double> x(n), y(op.output_size()), z(n);
    for (double& v : x) v = static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
    double nx = norm2(x);
    if (nx == 0.0) return 0.0;
    for (double& v : x) v /= nx;
    double estimate = 0.0;
    for (int it = 0; it < iters; ++it) {
        op.apply(x, y);
        estimate = norm2(y);
        op.apply_adjoint(y, z);
        const double nz = norm2(z);
        if (nz == 0.0) return 0.0;
        for (std::size_t i = 0; i < n; ++i) x[i] = z[i] / nz;
    }
    op.apply(x, y);
    estimate = std::max(estimate, norm2(y));
    return 1.05 * estimate;
}

ReducedImage boundary_reduce(const Image& image) {
    const int w = image.width(), h = image.height();
    if (w < 2 || h < 2) throw std::invalid_argument("boundary_reduce: image must be at least 2x2");
    ReducedImage out{image, {}};
    out.trace.rows.resize(h);
    out.trace.cols.resize(w);
    std::vector<double> buf(std::max(w, h));
    for (int i = 0; i < h; ++i) {
        Signal1D row{std::vector<double>(w), image.spacing()};
        for (int j = 0; j < w; ++j) row.samples[j] = out.image.at(i, j);
        ReducedSignal red = boundary_reduce(row);
        out.trace.rows[i] = red.trace;
        for (int j = 0; j < w; ++j) out.image.at(i, j) = red.signal.samples[j];
    }
    for (int j = 0; j < w; ++j) {
        Signal1D col{std::vector<double>(h), image.spacing()};
        for (int i = 0; i < h; ++i) col.samples[i] = out.image.at(i, j);
        ReducedSignal red = boundary_reduce(col);
        out.trace.cols[j] = red.trace;
        for (int i = 0; i < h; ++i) out.image.at(i, j) = red.signal.samples[i];
    }
    return out;
}

Image boundary_restore(const Image& reduced, const BoundaryTrace2D& trace) {
    const int w = reduced.width(), h = reduced.height();
    if (trace.rows.size() != static_cast<std::size_t>(h) ||
        trace.cols.size() != static_cast<std::size_t>(w)) {
        throw std::invalid_argument("boundary_restore: trace does not match image shape");
    }
    Image out = reduced;
    for (int j = 0; j < w; ++j) {
        Signal1D col{std::vector<double>(h), reduced.spacing()};
        for (int i = 0; i < h; ++i) col.samples[i] = out.at(i, j);
        Signal1D res = boundary_restore(col, trace.cols[j]);
        for (int i = 0; i < h; ++i) out.at(i, j) = res.samples[i];
    }
    for (int i = 0; i < h; ++i) {
        Signal1D row{std::vector<double>(w), reduced.spacing()};
        for (int j = 0; j < w; ++j) row.samples[j] = out.at(i, j);
        Signal1D res = boundary_restore(row, trace.rows[i]);
        for (int j = 0; j < w; ++j) out.at(i, j) = res.samples[j];
    }
    return out;
}

}  // namespace fractv
