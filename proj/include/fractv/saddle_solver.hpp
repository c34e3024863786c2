#pragma once

// First-order primal-dual (Chambolle-Pock) iteration for
//     min_x  G(x) + sum_b f_b(K_b x + c_b)
// where G is an optional quadratic data term on a leading segment of x and each f_b is
// either a weighted sum of pointwise l^p norms or a weighted squared L^2 norm.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fractv/grid_ops.hpp"
#include "fractv/lp_geometry.hpp"
#include "fractv/regularizers.hpp"

namespace fractv {

struct SolverOptions {
    int max_iters = 5000;
    double tol = 1e-6;
    double theta = 1.0;
    std::uint64_t seed = 0;
    double step_safety = 0.99;
    int norm_iters = 100;
    /// Objective is evaluated every this many iterations; the lowest one seen is returned.
    int check_every = 10;

    void validate() const;
};

struct SolveReport {
    int iterations = 0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    double objective = 0.0;
    double regularizer_value = 0.0;
    bool converged = false;
    double step = 0.0;
    /// max(primal, dual) residual at every iteration.
    std::vector<double> residual_history;
};

/// Iterates for warm starts.
struct SolverState {
    std::vector<double> x;
    std::vector<double> y;
};

struct DualBlock {
    enum class Kind { mass, quadratic };

    Kind kind = Kind::mass;
    /// mass: per-site radius (the weight of the norm); quadratic: coefficient of |z|^2.
    double weight = 0.0;
    LpExponent p{2.0};
    int channels = 1;
    std::size_t sites = 0;
    /// Optional constant c_b, laid out as the block output.
    std::vector<double> offset;
    /// y = K_b x
    std::function<void(std::span<const double>, std::span<double>)> forward;
    /// x += K_b^T y
    std::function<void(std::span<const double>, std::span<double>)> adjoint_add;
    std::string name;

    std::size_t size() const { return static_cast<std::size_t>(channels) * sites; }
};

class SaddleProblem {
public:
    explicit SaddleProblem(std::size_t primal_size);

    /// G(x) = weight * |x[offset:offset+n] - target|^2.
    void set_data_term(std::size_t offset, std::vector<double> target, double weight);
    void add_block(DualBlock block);

    std::size_t primal_size() const { return n_; }
    std::size_t dual_size() const;
    const std::vector<DualBlock>& blocks() const { return blocks_; }

    double data_value(std::span<const double> x) const;
    double block_value(std::size_t b, std::span<const double> x) const;
    double objective(std::span<const double> x) const;

    /// Norm estimate of the stacked operator (includes the 1.05 factor).
    double operator_norm(int iters, std::uint64_t seed) const;

    struct Result {
        std::vector<double> x;
        SolverState state;
        SolveReport report;
    };

    Result solve(const SolverOptions& opts, std::vector<double> x0,
                 const SolverState* warm = nullptr) const;

private:
    void apply_stack(std::span<const double> x, std::span<double> y) const;
    void apply_stack_adjoint(std::span<const double> y, std::span<double> x) const;

    std::size_t n_;
    std::size_t data_offset_ = 0;
    std::vector<double> data_target_;
    double data_weight_ = 0.0;
    std::vector<DualBlock> blocks_;
};

struct TvDenoiseResult {
    Image u;
    SolveReport report;
    SolverState state;
};

/// min_u |u - u_eta|^2 + alpha TV^r_{l^p}(u) + kappa H^{floor(r)+1}(u).
TvDenoiseResult solve_tv_denoise(const Image& u_eta, FracOrder r, double alpha, LpExponent p,
                                 double kappa, const SolverOptions& opts,
                                 const SolverState* warm = nullptr);

/// Objective of the problem solved by solve_tv_denoise.
double tv_denoise_objective(const Image& u, const Image& u_eta, FracOrder r, double alpha,
                            LpExponent p, double kappa);

struct RvlDenoiseResult {
    Image u;
    std::vector<VectorField> v;
    SolveReport report;
    SolverState state;
};

/// Joint minimization over (u, v_0..v_{k-1}) of
///     |u - u_eta|^2 + [objective inside the regularizer infimum] + kappa H^{floor(r1)+1}(u).
RvlDenoiseResult solve_rvl_denoise(const Image& u_eta, const RVLSpec& spec,
                                   const SolverOptions& opts, const SolverState* warm = nullptr);

/// Objective of the joint problem at (u, v).
double rvl_denoise_objective(const Image& u, const std::vector<VectorField>& v,
                             const Image& u_eta, const RVLSpec& spec);

}  // namespace fractv
