#pragma once

#include <vector>

#include "fractv/fractional_calculus.hpp"
#include "fractv/grid_ops.hpp"
#include "fractv/lp_geometry.hpp"

namespace fractv {

struct SolverOptions;
struct SolveReport;

/// Parameters of the unified regularizer: primal order r1, auxiliary order r2 = k + s,
/// weights alpha_0..alpha_k, exponents p_0..p_k and the Huber parameter kappa.
struct RVLSpec {
    FracOrder r1{1.0};
    FracOrder r2{1.0};
    std::vector<double> alpha{0.0, 0.0};
    std::vector<LpExponent> p{LpExponent(2.0), LpExponent(2.0)};
    double kappa = 1e-3;

    int layers() const { return r2.integer_part(); }
    /// Throws std::invalid_argument on any violated invariant.
    void validate() const;
    /// Channel count of auxiliary field v_j.
    static int aux_channels(int j) { return 2 << j; }
};

struct HuberSpec {
    int m = 1;
    double kappa = 1e-3;
};

/// c(r) * mixed_mass(frac_grad(u, r), p).
double tv_r_lp(const Image& u, FracOrder r, LpExponent p);

/// Sum of tv_r_lp over the component planes of a field.
double tv_r_lp(const VectorField& v, FracOrder r, LpExponent p);

/// H^m(u) = h^2 sum |grad^m u|_2^2. The kappa in `spec` is not applied; callers weight it.
double huber(const Image& u, const HuberSpec& spec);

/// Componentwise sum of H^m over a field's planes.
double huber(const VectorField& v, const HuberSpec& spec);

/// Order-1 gradient of every plane; channel c of v maps to channels 2c (x) and 2c+1 (y).
VectorField field_grad(const VectorField& v);

/// Objective inside the infimum defining the regularizer, at the auxiliary fields v.
double rvl_at(const Image& u, const std::vector<VectorField>& v, const RVLSpec& spec);

/// Zero auxiliary fields with the channel layout expected by rvl_at.
std::vector<VectorField> zero_aux_fields(const Image& u, const RVLSpec& spec);

struct RvlInfimum {
    double value = 0.0;
    std::vector<VectorField> v;
    bool converged = false;
    int iterations = 0;
};

/// Minimizes rvl_at over v with u frozen.
RvlInfimum rvl_infimum(const Image& u, const RVLSpec& spec, const SolverOptions& opts);

}  // namespace fractv
