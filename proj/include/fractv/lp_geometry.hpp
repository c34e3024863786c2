#pragma once

#include <span>
#include <string>
#include <vector>

namespace fractv {

class VectorField;

/// Exponent p in [1, inf]. Infinity is a distinguished value, never a large finite p.
class LpExponent {
public:
    LpExponent() = default;
    explicit LpExponent(double p);
    static LpExponent infinity();

    /// Accepts a decimal number >= 1 or "inf".
    static LpExponent parse(const std::string& text);

    double value() const { return p_; }
    bool is_infinite() const;
    LpExponent dual() const;
    std::string to_string() const;

    friend bool operator==(LpExponent a, LpExponent b) { return a.p_ == b.p_; }
    friend bool operator<(LpExponent a, LpExponent b) { return a.p_ < b.p_; }

private:
    double p_ = 2.0;
};

LpExponent dual_exponent(LpExponent p);

double lp_norm(std::span<const double> v, LpExponent p);

/// Euclidean projection of v onto {x : |x|_p <= radius}.
std::vector<double> project_ball(std::span<const double> v, LpExponent p, double radius);

/// In-place variant used by the dual updates; radius must be positive.
void project_ball_inplace(std::span<double> v, LpExponent p, double radius);
/// Same, with a warm start for the KKT multiplier of the general-p case. `*multiplier`
/// is read as a starting guess when positive and overwritten with the final value.
void project_ball_inplace(std::span<double> v, LpExponent p, double radius, double* multiplier);

/// h^2 * sum over sites of the pointwise l^p norm across channels.
double mixed_mass(const VectorField& field, LpExponent p);

}  // namespace fractv
