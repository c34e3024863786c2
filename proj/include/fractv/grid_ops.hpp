#pragma once

// Two-dimensional fractional gradients and divergences on the image lattice.
//
// Axis x runs along a row (column index j), axis y along a column (row index i).
// Primal operators use left stencils; their adjoints are the right stencils.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fractv/fractional_calculus.hpp"

namespace fractv {

class Image {
public:
    Image() = default;
    Image(int width, int height, double spacing = 1.0);
    Image(int width, int height, double spacing, std::vector<double> samples);

    int width() const { return width_; }
    int height() const { return height_; }
    double spacing() const { return h_; }
    std::size_t size() const { return samples_.size(); }

    double& at(int row, int col) { return samples_[static_cast<std::size_t>(row) * width_ + col]; }
    double at(int row, int col) const {
        return samples_[static_cast<std::size_t>(row) * width_ + col];
    }

    std::span<double> samples() { return samples_; }
    std::span<const double> samples() const { return samples_; }
    std::vector<double>& storage() { return samples_; }
    const std::vector<double>& storage() const { return samples_; }

    bool same_shape(const Image& other) const {
        return width_ == other.width_ && height_ == other.height_;
    }

private:
    int width_ = 0;
    int height_ = 0;
    double h_ = 1.0;
    std::vector<double> samples_;
};

/// `channels` image-shaped planes stored plane after plane.
class VectorField {
public:
    VectorField() = default;
    VectorField(int width, int height, double spacing, int channels);

    int width() const { return width_; }
    int height() const { return height_; }
    double spacing() const { return h_; }
    int channels() const { return channels_; }
    std::size_t plane_size() const { return static_cast<std::size_t>(width_) * height_; }
    std::size_t size() const { return data_.size(); }

    std::span<double> plane(int c) { return {data_.data() + c * plane_size(), plane_size()}; }
    std::span<const double> plane(int c) const {
        return {data_.data() + c * plane_size(), plane_size()};
    }
    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }

    /// Value of channel c at a site.
    double at(int c, std::size_t site) const { return data_[c * plane_size() + site]; }

private:
    int width_ = 0;
    int height_ = 0;
    double h_ = 1.0;
    int channels_ = 0;
    std::vector<double> data_;
};

enum class Axis { x, y };

/// Matrix-free linear map between flat real vectors.
class LinearOp {
public:
    virtual ~LinearOp() = default;
    virtual std::size_t input_size() const = 0;
    virtual std::size_t output_size() const = 0;
    virtual void apply(std::span<const double> in, std::span<double> out) const = 0;
    virtual void apply_adjoint(std::span<const double> in, std::span<double> out) const = 0;
    virtual std::string describe() const = 0;
};

/// One-dimensional fractional derivative swept along one axis of a plane.
struct AxisStencil {
    AxisStencil(FracOrder order, Side side, double h, std::size_t max_length);

    FracOrder order;
    Side side;
    double h;
    std::vector<double> weights;  // GL weights of the fractional part
    double scale;                 // h^{-s}
};

namespace kernels {

// Parallel sweeps (OpenMP over rows). Bit-identical to the serial reference.
void sweep(std::span<const double> in, std::span<double> out, int width, int height, Axis axis,
           const AxisStencil& stencil, bool transpose);

namespace serial {
void sweep(std::span<const double> in, std::span<double> out, int width, int height, Axis axis,
           const AxisStencil& stencil, bool transpose);
}  // namespace serial

}  // namespace kernels

/// Directional fractional gradient (d^r_x u, d^r_y u).
class FracGradOp final : public LinearOp {
public:
    FracGradOp(int width, int height, double h, FracOrder order, Side side = Side::left);

    std::size_t input_size() const override { return plane_; }
    std::size_t output_size() const override { return 2 * plane_; }
    void apply(std::span<const double> in, std::span<double> out) const override;
    void apply_adjoint(std::span<const double> in, std::span<double> out) const override;
    std::string describe() const override;

    FracOrder order() const { return stencil_x_.order; }

private:
    int width_, height_;
    std::size_t plane_;
    AxisStencil stencil_x_;
    AxisStencil stencil_y_;
};

/// m-fold order-1 gradient; 2^m channels, channel index bits read as the axis sequence
/// (most significant bit = first derivative applied, 0 = x, 1 = y).
class IntegerGradOp final : public LinearOp {
public:
    IntegerGradOp(int width, int height, double h, int m);

    std::size_t input_size() const override { return plane_; }
    std::size_t output_size() const override { return (std::size_t{1} << m_) * plane_; }
    void apply(std::span<const double> in, std::span<double> out) const override;
    void apply_adjoint(std::span<const double> in, std::span<double> out) const override;
    std::string describe() const override;

private:
    int width_, height_, m_;
    std::size_t plane_;
    FracGradOp grad_;
};

/// Applies `inner` independently to each of `copies` consecutive input blocks.
class BlockDiagonalOp final : public LinearOp {
public:
    BlockDiagonalOp(std::shared_ptr<const LinearOp> inner, int copies);

    std::size_t input_size() const override { return copies_ * inner_->input_size(); }
    std::size_t output_size() const override { return copies_ * inner_->output_size(); }
    void apply(std::span<const double> in, std::span<double> out) const override;
    void apply_adjoint(std::span<const double> in, std::span<double> out) const override;
    std::string describe() const override;

private:
    std::shared_ptr<const LinearOp> inner_;
    int copies_;
};

class IdentityOp final : public LinearOp {
public:
    explicit IdentityOp(std::size_t n) : n_(n) {}
    std::size_t input_size() const override { return n_; }
    std::size_t output_size() const override { return n_; }
    void apply(std::span<const double> in, std::span<double> out) const override;
    void apply_adjoint(std::span<const double> in, std::span<double> out) const override;
    std::string describe() const override { return "identity"; }

private:
    std::size_t n_;
};

/// (1 - 1/N) s + 1/N for N = 2; s = 1 at positive integer orders.
double divergence_scale(FracOrder order);

VectorField frac_grad(const Image& image, FracOrder order, Side side = Side::left);
/// -(adjoint sum) without the divergence scale: <grad u, phi> = -<u, div_raw phi>.
Image frac_div_raw(const VectorField& field, FracOrder order);
/// Scaled divergence c(s) * div_raw.
Image frac_div(const VectorField& field, FracOrder order);
VectorField integer_grad_power(const Image& image, int m);

/// Largest singular value by power iteration on K^T K, times a 1.05 safety factor.
double operator_norm(const LinearOp& op, int iters, std::uint64_t seed);

struct BoundaryTrace2D {
    std::vector<AffineTrace> rows;
    std::vector<AffineTrace> cols;
};

struct ReducedImage {
    Image image;
    BoundaryTrace2D trace;
};

/// Separable reduction: rows first, then columns. Every border sample of the result is 0.
ReducedImage boundary_reduce(const Image& image);
Image boundary_restore(const Image& reduced, const BoundaryTrace2D& trace);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

}  // namespace fractv
