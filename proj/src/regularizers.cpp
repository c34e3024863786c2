#include "fractv/regularizers.hpp"

#include <cmath>
#include <stdexcept>

namespace fractv {

void RVLSpec::validate() const {
    if (r1.value() < 1.0 || r2.value() < 1.0) {
        throw std::invalid_argument("RVLSpec: orders r1 and r2 must be >= 1");
    }
    if (r1.integer_part() > 3) throw std::invalid_argument("RVLSpec: r1 must be < 4");
    if (r2.integer_part() > 3) throw std::invalid_argument("RVLSpec: r2 must be < 4");
    const std::size_t expected = static_cast<std::size_t>(r2.integer_part()) + 1;
    if (alpha.size() != expected || p.size() != expected) {
        throw std::invalid_argument("RVLSpec: alpha and p need floor(r2)+1 entries");
    }
    for (double a : alpha) {
        if (!(a >= 0.0) || !std::isfinite(a)) {
            throw std::invalid_argument("RVLSpec: alpha entries must be finite and nonnegative");
        }
    }
    if (!(kappa > 0.0) || !std::isfinite(kappa)) {
        throw std::invalid_argument("RVLSpec: kappa must be positive");
    }
}

double tv_r_lp(const Image& u, FracOrder r, LpExponent p) {
    return divergence_scale(r) * mixed_mass(frac_grad(u, r), p);
}

double tv_r_lp(const VectorField& v, FracOrder r, LpExponent p) {
    double total = 0.0;
    for (int c = 0; c < v.channels(); ++c) {
        auto plane = v.plane(c);
        Image img(v.width(), v.height(), v.spacing(), std::vector<double>(plane.begin(), plane.end()));
        total += tv_r_lp(img, r, p);
    }
    return total;
}

double huber(const Image& u, const HuberSpec& spec) {
    const VectorField g = integer_grad_power(u, spec.m);
    double s = 0.0;
    for (double x : g.data()) s += x * x;
    const double h = u.spacing();
    return h * h * s;
}

double huber(const VectorField& v, const HuberSpec& spec) {
    double total = 0.0;
    for (int c = 0; c < v.channels(); ++c) {
        auto plane = v.plane(c);
        Image img(v.width(), v.height(), v.spacing(), std::vector<double>(plane.begin(), plane.end()));
        total += huber(img, spec);
    }
    return total;
}

VectorField field_grad(const VectorField& v) {
    VectorField out(v.width(), v.height(), v.spacing(), 2 * v.channels());
    FracGradOp grad(v.width(), v.height(), v.spacing(), FracOrder(1.0));
    const std::size_t n = v.plane_size();
    for (int c = 0; c < v.channels(); ++c) {
        grad.apply(v.plane(c), out.data().subspan(2 * c * n, 2 * n));
    }
    return out;
}

namespace {

void require_shape(const Image& u, const VectorField& f, int channels) {
    if (f.width() != u.width() || f.height() != u.height() || f.channels() != channels) {
        throw std::invalid_argument("rvl_at: auxiliary field shape mismatch");
    }
}

// a - scale * b, planewise
VectorField combine(const VectorField& a, const VectorField& b, double scale) {
    VectorField out = a;
    auto o = out.data();
    auto bd = b.data();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] -= scale * bd[i];
    return out;
}

}  // namespace

std::vector<VectorField> zero_aux_fields(const Image& u, const RVLSpec& spec) {
    std::vector<VectorField> v;
    for (int j = 0; j < spec.layers(); ++j) {
        v.emplace_back(u.width(), u.height(), u.spacing(), RVLSpec::aux_channels(j));
    }
    return v;
}

double rvl_at(const Image& u, const std::vector<VectorField>& v, const RVLSpec& spec) {
    spec.validate();
    const int k = spec.layers();
    if (static_cast<int>(v.size()) != k) {
        throw std::invalid_argument("rvl_at: need floor(r2) auxiliary fields");
    }
    for (int j = 0; j < k; ++j) require_shape(u, v[j], RVLSpec::aux_channels(j));

    const double s = spec.r2.fractional_part();
    const FracOrder s_order(s);
    // The measure grad^{r1} u carries the divergence scale, so that v = 0 gives alpha_0 TV^{r1}.
    VectorField g = frac_grad(u, spec.r1);
    const double c1 = divergence_scale(spec.r1);
    for (double& x : g.data()) x *= c1;
    const HuberSpec h1{1, spec.kappa};

    if (k == 1) {
        double value = spec.alpha[0] * mixed_mass(combine(g, v[0], s), spec.p[0]);
        if (s > 0.0) {
            value += spec.alpha[1] * s *
                     (tv_r_lp(v[0], s_order, spec.p[1]) + spec.kappa * huber(v[0], h1));
        }
        return value;
    }
    double value = spec.alpha[0] * mixed_mass(combine(g, v[0], 1.0), spec.p[0]);
    for (int j = 1; j < k; ++j) {
        value += spec.alpha[j] * mixed_mass(combine(field_grad(v[j - 1]), v[j], 1.0), spec.p[j]);
    }
    value += spec.alpha[k] *
             (tv_r_lp(v[k - 1], s_order, spec.p[k]) + spec.kappa * huber(v[k - 1], h1));
    return value;
}

}  // namespace fractv
