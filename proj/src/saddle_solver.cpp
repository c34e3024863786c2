#include "fractv/saddle_solver.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace fractv {

void SolverOptions::validate() const {
    if (max_iters < 1) throw std::invalid_argument("SolverOptions: max_iters must be >= 1");
    if (!(tol > 0.0)) throw std::invalid_argument("SolverOptions: tol must be positive");
    if (!(theta >= 0.0 && theta <= 1.0)) {
        throw std::invalid_argument("SolverOptions: theta must lie in [0,1]");
    }
    if (!(step_safety > 0.0 && step_safety < 1.0)) {
        throw std::invalid_argument("SolverOptions: step_safety must lie in (0,1)");
    }
    if (norm_iters < 1) throw std::invalid_argument("SolverOptions: norm_iters must be >= 1");
    if (check_every < 1) throw std::invalid_argument("SolverOptions: check_every must be >= 1");
}

// ---- SaddleProblem ------------------------------------------------------------------------

namespace {

class StackOp final : public LinearOp {
public:
    StackOp(const SaddleProblem& p, std::function<void(std::span<const double>, std::span<double>)> f,
            std::function<void(std::span<const double>, std::span<double>)> a)
        : p_(p), f_(std::move(f)), a_(std::move(a)) {}
    std::size_t input_size() const override { return p_.primal_size(); }
    std::size_t output_size() const override { return p_.dual_size(); }
    void apply(std::span<const double> in, std::span<double> out) const override { f_(in, out); }
    void apply_adjoint(std::span<const double> in, std::span<double> out) const override {
        a_(in, out);
    }
    std::string describe() const override { return "stacked saddle operator"; }

private:
    const SaddleProblem& p_;
    std::function<void(std::span<const double>, std::span<double>)> f_, a_;
};

double site_norm(std::span<const double> y, std::size_t site, std::size_t sites, int channels,
                 LpExponent p, double* buf) {
    for (int c = 0; c < channels; ++c) buf[c] = y[c * sites + site];
    return lp_norm(std::span<const double>(buf, channels), p);
}

}  // namespace

SaddleProblem::SaddleProblem(std::size_t primal_size) : n_(primal_size) {}

void SaddleProblem::set_data_term(std::size_t offset, std::vector<double> target, double weight) {
    if (offset + target.size() > n_) throw std::invalid_argument("data term exceeds primal size");
    data_offset_ = offset;
    data_target_ = std::move(target);
    data_weight_ = weight;
}

void SaddleProblem::add_block(DualBlock block) {
    if (!block.forward || !block.adjoint_add) throw std::invalid_argument("block without operator");
    if (!block.offset.empty() && block.offset.size() != block.size()) {
        throw std::invalid_argument("block offset has the wrong size");
    }
    if (block.channels > 64) throw std::invalid_argument("block has too many channels");
    blocks_.push_back(std::move(block));
}

std::size_t SaddleProblem::dual_size() const {
    std::size_t m = 0;
    for (const auto& b : blocks_) m += b.size();
    return m;
}

void SaddleProblem::apply_stack(std::span<const double> x, std::span<double> y) const {
    std::size_t off = 0;
    for (const auto& b : blocks_) {
        b.forward(x, y.subspan(off, b.size()));
        off += b.size();
    }
}

void SaddleProblem::apply_stack_adjoint(std::span<const double> y, std::span<double> x) const {
    std::fill(x.begin(), x.end(), 0.0);
    std::size_t off = 0;
    for (const auto& b : blocks_) {
        b.adjoint_add(y.subspan(off, b.size()), x);
        off += b.size();
    }
}

double SaddleProblem::data_value(std::span<const double> x) const {
    double s = 0.0;
    for (std::size_t i = 0; i < data_target_.size(); ++i) {
        const double d = x[data_offset_ + i] - data_target_[i];
        s += d * d;
    }
    return data_weight_ * s;
}

double SaddleProblem::block_value(std::size_t index, std::span<const double> x) const {
    const DualBlock& b = blocks_[index];
    std::vector<double> z(b.size());
    b.forward(x, z);
    if (!b.offset.empty()) {
        for (std::size_t i = 0; i < z.size(); ++i) z[i] += b.offset[i];
    }
    double total = 0.0;
    if (b.kind == DualBlock::Kind::quadratic) {
        for (double v : z) total += v * v;
    } else {
        double buf[64];
        for (std::size_t s = 0; s < b.sites; ++s) total += site_norm(z, s, b.sites, b.channels, b.p, buf);
    }
    return b.weight * total;
}

double SaddleProblem::objective(std::span<const double> x) const {
    double f = data_value(x);
    for (std::size_t b = 0; b < blocks_.size(); ++b) f += block_value(b, x);
    return f;
}

double SaddleProblem::operator_norm(int iters, std::uint64_t seed) const {
    if (blocks_.empty()) return 0.0;
    StackOp op(
        *this, [this](std::span<const double> a, std::span<double> b) { apply_stack(a, b); },
        [this](std::span<const double> a, std::span<double> b) { apply_stack_adjoint(a, b); });
    return fractv::operator_norm(op, iters, seed);
}

SaddleProblem::Result SaddleProblem::solve(const SolverOptions& opts, std::vector<double> x0,
                                           const SolverState* warm) const {
    opts.validate();
    if (x0.size() != n_) throw std::invalid_argument("solve: initial point has the wrong size");
    const std::size_t m = dual_size();

    std::vector<double> x = std::move(x0);
    std::vector<double> y(m, 0.0);
    if (warm) {
        if (!warm->x.empty() && warm->x.size() != n_) throw std::invalid_argument("solve: warm primal has the wrong size");
        if (!warm->y.empty() && warm->y.size() != m) throw std::invalid_argument("solve: warm dual has the wrong size");
        if (!warm->x.empty()) x = warm->x;
        if (!warm->y.empty()) y = warm->y;
    }

    const double knorm = operator_norm(opts.norm_iters, opts.seed);
    const double step = knorm > 0.0 ? opts.step_safety / knorm : 1.0;
    const double tau = step, sigma = step, theta = opts.theta;

    std::vector<double> xn(n_), kty(n_), kty_new(n_);
    std::vector<double> kx(m), kxn(m), yn(m);
    apply_stack(x, kx);
    apply_stack_adjoint(y, kty);

    Result result;
    result.report.step = step;
    double best_obj = objective(x);
    std::vector<double> best_x = x;

    const double data_w = data_weight_;
    const double residual_scale = data_w > 0.0 ? data_w : 1.0;
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(n_, 1)));
    const double inv_sqrt_m = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(m, 1)));

    // KKT multipliers of the general-p projections, carried between iterations per site
    std::vector<std::vector<double>> multipliers(blocks_.size());
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
        if (blocks_[b].kind == DualBlock::Kind::mass) multipliers[b].assign(blocks_[b].sites, 0.0);
    }

    double primal_res = 0.0, dual_res = 0.0;
    int it = 0;
    bool converged = false;
    while (it < opts.max_iters) {
        ++it;
        // primal step and resolvent of the data term
        for (std::size_t i = 0; i < n_; ++i) xn[i] = x[i] - tau * kty[i];
        if (data_w > 0.0) {
            const double denom = 1.0 + 2.0 * tau * data_w;
            for (std::size_t i = 0; i < data_target_.size(); ++i) {
                double& v = xn[data_offset_ + i];
                v = (v + 2.0 * tau * data_w * data_target_[i]) / denom;
            }
        }
        apply_stack(xn, kxn);

        // dual step on K xbar = (1+theta) K x_{n+1} - theta K x_n, then resolvents of f_b^*
        std::size_t off = 0;
        for (std::size_t bi = 0; bi < blocks_.size(); ++bi) {
            const DualBlock& b = blocks_[bi];
            const std::size_t sz = b.size();
            for (std::size_t i = 0; i < sz; ++i) {
                const std::size_t g = off + i;
                const double kxbar = (1.0 + theta) * kxn[g] - theta * kx[g];
                const double c = b.offset.empty() ? 0.0 : b.offset[i];
                yn[g] = y[g] + sigma * (kxbar + c);
            }
            if (b.kind == DualBlock::Kind::quadratic) {
                const double shrink = 1.0 / (1.0 + sigma / (2.0 * b.weight));
                for (std::size_t i = 0; i < sz; ++i) yn[off + i] *= shrink;
            } else {
                const LpExponent q = b.p.dual();
                const std::size_t sites = b.sites;
                double buf[64];
                if (q == LpExponent(2.0) && b.channels == 2) {
                    double* y0 = yn.data() + off;
                    double* y1 = y0 + sites;
                    for (std::size_t s = 0; s < sites; ++s) {
                        const double nrm = std::sqrt(y0[s] * y0[s] + y1[s] * y1[s]);
                        if (nrm > b.weight) {
                            const double f = b.weight / nrm;
                            y0[s] *= f;
                            y1[s] *= f;
                        }
                    }
                } else {
                    for (std::size_t s = 0; s < sites; ++s) {
                        for (int c = 0; c < b.channels; ++c) buf[c] = yn[off + c * sites + s];
                        project_ball_inplace(std::span<double>(buf, b.channels), q, b.weight,
                                             &multipliers[bi][s]);
                        for (int c = 0; c < b.channels; ++c) yn[off + c * sites + s] = buf[c];
                    }
                }
            }
            off += sz;
        }
        apply_stack_adjoint(yn, kty_new);

        double pr = 0.0, dr = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            const double r = (x[i] - xn[i]) / tau - (kty[i] - kty_new[i]);
            pr += r * r;
        }
        for (std::size_t g = 0; g < m; ++g) {
            const double r = (y[g] - yn[g]) / sigma + (kxn[g] - kx[g]);
            dr += r * r;
        }
        primal_res = std::sqrt(pr) * inv_sqrt_n / residual_scale;
        dual_res = std::sqrt(dr) * inv_sqrt_m;
        result.report.residual_history.push_back(std::max(primal_res, dual_res));

        x.swap(xn);
        y.swap(yn);
        kx.swap(kxn);
        kty.swap(kty_new);

        converged = std::max(primal_res, dual_res) <= opts.tol;
        if (converged || it % opts.check_every == 0 || it == opts.max_iters) {
            const double f = objective(x);
            if (f < best_obj) {
                best_obj = f;
                best_x = x;
            }
        }
        if (converged) break;
    }

    result.report.iterations = it;
    result.report.primal_residual = primal_res;
    result.report.dual_residual = dual_res;
    result.report.converged = converged;
    result.report.objective = best_obj;
    result.x = std::move(best_x);
    result.state.x = std::move(x);
    result.state.y = std::move(y);
    return result;
}

// ---- problem builders ---------------------------------------------------------------------

namespace {

using Span = std::span<const double>;
using MutSpan = std::span<double>;

void require_input(const Image& u_eta) {
    if (u_eta.width() < 1 || u_eta.height() < 1) throw std::invalid_argument("empty image");
}

int huber_order(FracOrder r) {
    const int m = r.integer_part() + 1;
    if (m > 4) throw std::invalid_argument("order too large for the Huber term (floor(r) <= 3)");
    return m;
}

/// Layout of the primal vector for the joint (u, v_0..v_{k-1}) problem.
struct Layout {
    std::size_t plane = 0;
    bool has_u = true;
    int layers = 0;
    std::vector<std::size_t> v_offset;
    std::size_t total = 0;

    Layout(std::size_t plane_, bool has_u_, int layers_) : plane(plane_), has_u(has_u_), layers(layers_) {
        std::size_t off = has_u ? plane : 0;
        for (int j = 0; j < layers; ++j) {
            v_offset.push_back(off);
            off += static_cast<std::size_t>(RVLSpec::aux_channels(j)) * plane;
        }
        total = off;
    }
    std::size_t v_size(int j) const { return static_cast<std::size_t>(RVLSpec::aux_channels(j)) * plane; }
};

DualBlock mass_block(std::string name, double weight, LpExponent p, int channels, std::size_t sites) {
    DualBlock b;
    b.kind = DualBlock::Kind::mass;
    b.name = std::move(name);
    b.weight = weight;
    b.p = p;
    b.channels = channels;
    b.sites = sites;
    return b;
}

DualBlock quadratic_block(std::string name, double weight, int channels, std::size_t sites) {
    DualBlock b;
    b.kind = DualBlock::Kind::quadratic;
    b.name = std::move(name);
    b.weight = weight;
    b.channels = channels;
    b.sites = sites;
    return b;
}

/// Huber block kappa * h^2 |grad^m u|^2 acting on the u segment.
void add_u_huber(SaddleProblem& prob, const Image& shape, int m, double kappa) {
    const std::size_t n = shape.size();
    auto op = std::make_shared<IntegerGradOp>(shape.width(), shape.height(), shape.spacing(), m);
    const double h2 = shape.spacing() * shape.spacing();
    // |grad^m| grows like (sqrt(8)/h)^m and would set the step for the whole stack, so
    // the block is written as (w / lam^2) |lam grad^m u|^2 with lam |grad^m| ~ |grad|.
    const double lam = std::pow(shape.spacing() / std::sqrt(8.0), m - 1);
    DualBlock b = quadratic_block("huber_u", kappa * h2 / (lam * lam), 1 << m, n);
    b.forward = [op, n, lam](Span x, MutSpan y) {
        op->apply(x.subspan(0, n), y);
        for (double& v : y) v *= lam;
    };
    b.adjoint_add = [op, n, lam](Span y, MutSpan x) {
        std::vector<double> tmp(n);
        op->apply_adjoint(y, tmp);
        for (std::size_t i = 0; i < n; ++i) x[i] += lam * tmp[i];
    };
    prob.add_block(std::move(b));
}

/// Blocks of the regularizer infimum. With `frozen_u`, the u-gradient enters as an offset.
void add_rvl_blocks(SaddleProblem& prob, const Layout& L, const Image& shape, const RVLSpec& spec,
                    const Image* frozen_u) {
    const int w = shape.width(), hgt = shape.height();
    const double h = shape.spacing(), h2 = h * h;
    const std::size_t n = L.plane;
    const int k = L.layers;
    const double s = spec.r2.fractional_part();
    const double c1 = divergence_scale(spec.r1);
    auto g1 = std::make_shared<FracGradOp>(w, hgt, h, spec.r1);
    auto grad = std::make_shared<FracGradOp>(w, hgt, h, FracOrder(1.0));

    // alpha_0 | c(r1) grad^{r1} u - coupling * v_0 |
    if (spec.alpha[0] > 0.0) {
        const double coupling = (k == 1) ? s : 1.0;
        const std::size_t v0 = L.v_offset[0];
        const bool has_u = L.has_u;
        DualBlock b = mass_block("coupling_0", spec.alpha[0] * h2, spec.p[0], 2, n);
        b.forward = [=](Span x, MutSpan y) {
            if (has_u) {
                g1->apply(x.subspan(0, n), y);
                for (double& v : y) v *= c1;
            } else {
                std::fill(y.begin(), y.end(), 0.0);
            }
            for (std::size_t i = 0; i < 2 * n; ++i) y[i] -= coupling * x[v0 + i];
        };
        b.adjoint_add = [=](Span y, MutSpan x) {
            if (has_u) {
                std::vector<double> tmp(n);
                g1->apply_adjoint(y, tmp);
                for (std::size_t i = 0; i < n; ++i) x[i] += c1 * tmp[i];
            }
            for (std::size_t i = 0; i < 2 * n; ++i) x[v0 + i] -= coupling * y[i];
        };
        if (frozen_u) {
            b.offset.resize(2 * n);
            g1->apply(frozen_u->samples(), b.offset);
            for (double& v : b.offset) v *= c1;
        }
        prob.add_block(std::move(b));
    }

    // alpha_j | grad v_{j-1} - v_j |
    for (int j = 1; j < k; ++j) {
        if (!(spec.alpha[j] > 0.0)) continue;
        const int cin = RVLSpec::aux_channels(j - 1);
        const std::size_t prev = L.v_offset[j - 1], cur = L.v_offset[j];
        DualBlock b = mass_block("chain_" + std::to_string(j), spec.alpha[j] * h2, spec.p[j], 2 * cin, n);
        b.forward = [=](Span x, MutSpan y) {
            for (int c = 0; c < cin; ++c) {
                grad->apply(x.subspan(prev + c * n, n), y.subspan(2 * c * n, 2 * n));
            }
            for (std::size_t i = 0; i < 2 * cin * n; ++i) y[i] -= x[cur + i];
        };
        b.adjoint_add = [=](Span y, MutSpan x) {
            std::vector<double> tmp(n);
            for (int c = 0; c < cin; ++c) {
                grad->apply_adjoint(y.subspan(2 * c * n, 2 * n), tmp);
                for (std::size_t i = 0; i < n; ++i) x[prev + c * n + i] += tmp[i];
            }
            for (std::size_t i = 0; i < 2 * cin * n; ++i) x[cur + i] -= y[i];
        };
        prob.add_block(std::move(b));
    }

    // last layer: weight * [TV^s(v_{k-1}) + kappa H^1(v_{k-1})]
    const double last_weight = (k == 1) ? spec.alpha[1] * s : spec.alpha[k];
    if (last_weight > 0.0) {
        const int cl = RVLSpec::aux_channels(k - 1);
        const std::size_t last = L.v_offset[k - 1];
        const FracOrder s_order(s);
        auto gs = std::make_shared<FracGradOp>(w, hgt, h, s_order);
        const double tv_weight = last_weight * divergence_scale(s_order) * h2;
        for (int c = 0; c < cl; ++c) {
            const std::size_t base = last + c * n;
            DualBlock b = mass_block("tv_s_" + std::to_string(c), tv_weight, spec.p[k], 2, n);
            b.forward = [=](Span x, MutSpan y) { gs->apply(x.subspan(base, n), y); };
            b.adjoint_add = [=](Span y, MutSpan x) {
                std::vector<double> tmp(n);
                gs->apply_adjoint(y, tmp);
                for (std::size_t i = 0; i < n; ++i) x[base + i] += tmp[i];
            };
            prob.add_block(std::move(b));
        }
        DualBlock hb = quadratic_block("huber_v", last_weight * spec.kappa * h2, 2 * cl, n);
        hb.forward = [=](Span x, MutSpan y) {
            for (int c = 0; c < cl; ++c) {
                grad->apply(x.subspan(last + c * n, n), y.subspan(2 * c * n, 2 * n));
            }
        };
        hb.adjoint_add = [=](Span y, MutSpan x) {
            std::vector<double> tmp(n);
            for (int c = 0; c < cl; ++c) {
                grad->apply_adjoint(y.subspan(2 * c * n, 2 * n), tmp);
                for (std::size_t i = 0; i < n; ++i) x[last + c * n + i] += tmp[i];
            }
        };
        prob.add_block(std::move(hb));
    }
}

// RVL with k = 1 and s = 0 has no auxiliary variable: the coupling is s v_0 and the last
// layer is weighted by alpha_1 s.
bool aux_is_inert(const RVLSpec& spec) {
    return spec.layers() == 1 && spec.r2.fractional_part() == 0.0;
}

// alpha c(r) h^2 |grad^r u|_p on the first n primal entries.
void add_tv_block(SaddleProblem& prob, const Image& u_eta, FracOrder r, double alpha, LpExponent p) {
    if (!(alpha > 0.0)) return;
    const std::size_t n = u_eta.size();
    const double h2 = u_eta.spacing() * u_eta.spacing();
    auto g = std::make_shared<FracGradOp>(u_eta.width(), u_eta.height(), u_eta.spacing(), r);
    DualBlock b = mass_block("tv", alpha * divergence_scale(r) * h2, p, 2, n);
    b.forward = [g](Span x, MutSpan y) { g->apply(x.first(g->input_size()), y); };
    b.adjoint_add = [g, n](Span y, MutSpan x) {
        std::vector<double> tmp(n);
        g->apply_adjoint(y, tmp);
        for (std::size_t i = 0; i < n; ++i) x[i] += tmp[i];
    };
    prob.add_block(std::move(b));
}

std::vector<VectorField> unpack_aux(std::span<const double> x, const Layout& L, const Image& shape) {
    std::vector<VectorField> v;
    for (int j = 0; j < L.layers; ++j) {
        VectorField f(shape.width(), shape.height(), shape.spacing(), RVLSpec::aux_channels(j));
        auto src = x.subspan(L.v_offset[j], L.v_size(j));
        std::copy(src.begin(), src.end(), f.data().begin());
        v.push_back(std::move(f));
    }
    return v;
}

}  // namespace

TvDenoiseResult solve_tv_denoise(const Image& u_eta, FracOrder r, double alpha, LpExponent p,
                                 double kappa, const SolverOptions& opts, const SolverState* warm) {
    require_input(u_eta);
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
        throw std::invalid_argument("solve_tv_denoise: alpha must be nonnegative");
    }
    if (!(kappa > 0.0)) throw std::invalid_argument("solve_tv_denoise: kappa must be positive");
    const int m = huber_order(r);
    const std::size_t n = u_eta.size();
    const double h2 = u_eta.spacing() * u_eta.spacing();

    SaddleProblem prob(n);
    prob.set_data_term(0, u_eta.storage(), h2);
    add_tv_block(prob, u_eta, r, alpha, p);
    add_u_huber(prob, u_eta, m, kappa);

    auto res = prob.solve(opts, u_eta.storage(), warm);
    TvDenoiseResult out{Image(u_eta.width(), u_eta.height(), u_eta.spacing(), std::move(res.x)),
                        std::move(res.report), std::move(res.state)};
    out.report.regularizer_value = alpha * tv_r_lp(out.u, r, p);
    return out;
}

double tv_denoise_objective(const Image& u, const Image& u_eta, FracOrder r, double alpha,
                            LpExponent p, double kappa) {
    if (!u.same_shape(u_eta)) throw std::invalid_argument("tv_denoise_objective: shape mismatch");
    const double h2 = u.spacing() * u.spacing();
    double data = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double d = u.storage()[i] - u_eta.storage()[i];
        data += d * d;
    }
    const double tv = alpha > 0.0 ? alpha * tv_r_lp(u, r, p) : 0.0;
    return h2 * data + tv + kappa * huber(u, HuberSpec{huber_order(r), kappa});
}

RvlDenoiseResult solve_rvl_denoise(const Image& u_eta, const RVLSpec& spec,
                                   const SolverOptions& opts, const SolverState* warm) {
    require_input(u_eta);
    spec.validate();
    const int m = huber_order(spec.r1);
    const std::size_t n = u_eta.size();
    const double h2 = u_eta.spacing() * u_eta.spacing();
    const bool inert = aux_is_inert(spec);
    const Layout L(n, true, inert ? 0 : spec.layers());

    SaddleProblem prob(L.total);
    prob.set_data_term(0, u_eta.storage(), h2);
    if (inert) {
        // the same problem solve_tv_denoise builds, so the two agree bit for bit
        add_tv_block(prob, u_eta, spec.r1, spec.alpha[0], spec.p[0]);
    } else {
        add_rvl_blocks(prob, L, u_eta, spec, nullptr);
    }
    add_u_huber(prob, u_eta, m, spec.kappa);

    std::vector<double> x0(L.total, 0.0);
    std::copy(u_eta.storage().begin(), u_eta.storage().end(), x0.begin());
    auto res = prob.solve(opts, std::move(x0), warm);

    RvlDenoiseResult out;
    out.u = Image(u_eta.width(), u_eta.height(), u_eta.spacing(),
                  std::vector<double>(res.x.begin(), res.x.begin() + n));
    out.v = inert ? zero_aux_fields(u_eta, spec) : unpack_aux(res.x, L, u_eta);
    out.report = std::move(res.report);
    out.state = std::move(res.state);
    out.report.regularizer_value = rvl_at(out.u, out.v, spec);
    return out;
}

double rvl_denoise_objective(const Image& u, const std::vector<VectorField>& v, const Image& u_eta,
                             const RVLSpec& spec) {
    if (!u.same_shape(u_eta)) throw std::invalid_argument("rvl_denoise_objective: shape mismatch");
    const double h2 = u.spacing() * u.spacing();
    double data = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double d = u.storage()[i] - u_eta.storage()[i];
        data += d * d;
    }
    return h2 * data + rvl_at(u, v, spec) +
           spec.kappa * huber(u, HuberSpec{huber_order(spec.r1), spec.kappa});
}

RvlInfimum rvl_infimum(const Image& u, const RVLSpec& spec, const SolverOptions& opts) {
    spec.validate();
    RvlInfimum out;
    if (aux_is_inert(spec)) {
        out.v = zero_aux_fields(u, spec);
        out.value = rvl_at(u, out.v, spec);
        out.converged = true;
        return out;
    }
    const Layout L(u.size(), false, spec.layers());
    SaddleProblem prob(L.total);
    add_rvl_blocks(prob, L, u, spec, &u);
    auto res = prob.solve(opts, std::vector<double>(L.total, 0.0));
    out.v = unpack_aux(res.x, L, u);
    out.value = rvl_at(u, out.v, spec);
    out.converged = res.report.converged;
    out.iterations = res.report.iterations;
    return out;
}

}  // namespace fractv
