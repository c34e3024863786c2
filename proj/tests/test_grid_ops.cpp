#include <doctest.h>

#include <Eigen/SVD>

#include <cmath>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "fractv/grid_ops.hpp"
#include "fractv/parallel.hpp"
#include "helpers.hpp"
#include "oracle.hpp"

using namespace fractv;
using namespace testing_helpers;

namespace {

class ZeroOp final : public LinearOp {
public:
    std::size_t input_size() const override { return 9; }
    std::size_t output_size() const override { return 4; }
    void apply(std::span<const double>, std::span<double> out) const override {
        std::fill(out.begin(), out.end(), 0.0);
    }
    void apply_adjoint(std::span<const double>, std::span<double> out) const override {
        std::fill(out.begin(), out.end(), 0.0);
    }
    std::string describe() const override { return "zero"; }
};

double adjoint_defect(const LinearOp& op, std::mt19937_64& gen) {
    const auto u = random_vector(op.input_size(), gen);
    const auto phi = random_vector(op.output_size(), gen);
    std::vector<double> ku(op.output_size()), kphi(op.input_size());
    op.apply(u, ku);
    op.apply_adjoint(phi, kphi);
    return std::abs(dot(ku, phi) - dot(u, kphi)) / (norm2(u) * norm2(phi));
}

oracle::Mat dense_of(const LinearOp& op, bool adjoint) {
    const std::size_t n = adjoint ? op.output_size() : op.input_size();
    const std::size_t m = adjoint ? op.input_size() : op.output_size();
    oracle::Mat out(m, n);
    std::vector<double> e(n, 0.0), col(m);
    for (std::size_t j = 0; j < n; ++j) {
        e[j] = 1.0;
        if (adjoint) op.apply_adjoint(e, col); else op.apply(e, col);
        for (std::size_t i = 0; i < m; ++i) out(i, j) = col[i];
        e[j] = 0.0;
    }
    return out;
}

}  // namespace

TEST_SUITE("grid_ops") {

TEST_CASE("image and field validation") {
    CHECK_THROWS_AS(Image(0, 3), std::invalid_argument);
    CHECK_THROWS_AS(Image(2, 2, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(Image(2, 2, 1.0, {1, 2, 3}), std::invalid_argument);
    CHECK_THROWS_AS(Image(2, 1, 1.0, {1, INFINITY}), std::invalid_argument);
    CHECK_THROWS_AS(VectorField(2, 2, 1.0, 0), std::invalid_argument);
    Image img(3, 2, 0.5, {1, 2, 3, 4, 5, 6});
    CHECK(img.at(1, 0) == 4.0);
    CHECK(img.spacing() == 0.5);
}

TEST_CASE("frac_grad at order zero copies the image") {
    std::mt19937_64 gen(1);
    const Image u = random_image(7, 5, gen);
    const VectorField g = frac_grad(u, FracOrder(0.0));
    for (std::size_t i = 0; i < u.size(); ++i) {
        CHECK(g.at(0, i) == u.storage()[i]);
        CHECK(g.at(1, i) == u.storage()[i]);
    }
}

TEST_CASE("frac_grad on constants and ramps") {
    Image c(8, 8, 1.0 / 7);
    for (double& x : c.storage()) x = 3.0;
    const VectorField gc = frac_grad(boundary_reduce(c).image, FracOrder(1.0));
    for (double x : gc.data()) CHECK(x == 0.0);
    const VectorField graw = frac_grad(c, FracOrder(1.0));
    CHECK(graw.at(0, 0) != 0.0);  // zero extension creates a jump at the first column
    CHECK(graw.at(0, 1) == 0.0);

    Image ramp(8, 8, 1.0 / 7);
    for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 8; ++j) ramp.at(i, j) = j / 7.0;
    }
    const VectorField g = frac_grad(ramp, FracOrder(1.0));
    for (int i = 1; i < 8; ++i) {
        for (int j = 1; j < 8; ++j) {
            CHECK(g.at(0, i * 8 + j) == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(std::abs(g.at(1, i * 8 + j)) <= 1e-14);
        }
    }
}

TEST_CASE("divergence scale") {
    CHECK(divergence_scale(FracOrder(0.0)) == 0.5);
    CHECK(divergence_scale(FracOrder(1.0)) == 1.0);
    CHECK(divergence_scale(FracOrder(2.0)) == 1.0);
    CHECK(divergence_scale(FracOrder(0.5)) == 0.75);
    CHECK(divergence_scale(FracOrder(1.25)) == doctest::Approx(0.625));
}

TEST_CASE("frac_div at orders zero and one") {
    std::mt19937_64 gen(2);
    VectorField phi(6, 5, 1.0, 2);
    for (double& x : phi.data()) x = std::uniform_real_distribution<double>(-1, 1)(gen);
    const Image d0 = frac_div(phi, FracOrder(0.0));
    for (std::size_t i = 0; i < d0.size(); ++i) {
        // <u, phi_1 + phi_2> = -<u, div phi>
        CHECK(d0.storage()[i] == doctest::Approx(-(phi.at(0, i) + phi.at(1, i)) / 2));
    }
    // order one: the usual discrete divergence, minus the transpose of backward differences
    const Image d1 = frac_div(phi, FracOrder(1.0));
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 6; ++j) {
            const std::size_t s = static_cast<std::size_t>(i) * 6 + j;
            const double px = phi.at(0, s) - (j + 1 < 6 ? phi.at(0, s + 1) : 0.0);
            const double py = phi.at(1, s) - (i + 1 < 5 ? phi.at(1, s + 6) : 0.0);
            CHECK(d1.storage()[s] == doctest::Approx(-(px + py)));
        }
    }
    CHECK_THROWS_AS(frac_div(VectorField(3, 3, 1.0, 3), FracOrder(1.0)), std::invalid_argument);
}

TEST_CASE("frac_grad matches the dense Gamma oracle and its transpose") {
    for (double r : {0.0, 0.3, 0.7, 1.0, 1.5, 2.0, 2.6}) {
        const int w = 6, h = 5;
        const double sp = 1.0 / 5;
        FracGradOp op(w, h, sp, FracOrder(r));
        const oracle::Mat ref = oracle::frac_grad(w, h, r, sp);
        const oracle::Mat fwd = dense_of(op, false);
        const oracle::Mat adj = dense_of(op, true);
        const double scale = ref.cwiseAbs().maxCoeff();
        CHECK((fwd - ref).cwiseAbs().maxCoeff() <= 1e-11 * scale);
        CHECK((adj - ref.transpose()).cwiseAbs().maxCoeff() <= 1e-11 * scale);
    }
}

TEST_CASE("frac_div_raw is the negative adjoint") {
    std::mt19937_64 gen(21);
    for (double r : {0.3, 1.0, 1.5}) {
        const Image u = random_image(16, 16, gen);
        VectorField phi(16, 16, 1.0, 2);
        for (double& x : phi.data()) x = std::uniform_real_distribution<double>(-1, 1)(gen);
        const VectorField g = frac_grad(u, FracOrder(r));
        const Image d = frac_div_raw(phi, FracOrder(r));
        const Image ds = frac_div(phi, FracOrder(r));
        const double lhs = dot(g.data(), phi.data());
        const double rhs = -dot(u.samples(), d.samples());
        CHECK(std::abs(lhs - rhs) <= 1e-10 * norm2(g.data()) * norm2(phi.data()));
        CHECK(std::abs(lhs + dot(u.samples(), ds.samples()) / scale_of(r)) <=
              1e-10 * norm2(g.data()) * norm2(phi.data()));
    }
}

TEST_CASE("adjoint consistency over random instances") {
    std::mt19937_64 gen(42);
    for (double r : {0.0, 0.3, 0.7, 1.0, 1.5, 2.0}) {
        for (Side side : {Side::left, Side::right, Side::central}) {
            FracGradOp op(16, 16, 1.0 / 15, FracOrder(r), side);
            double worst = 0.0;
            for (int t = 0; t < 100; ++t) worst = std::max(worst, adjoint_defect(op, gen));
            CHECK(worst <= 1e-10);
        }
    }
    for (int m = 1; m <= 4; ++m) {
        IntegerGradOp op(9, 7, 1.0, m);
        CHECK(adjoint_defect(op, gen) <= 1e-10);
    }
    auto inner = std::make_shared<FracGradOp>(5, 4, 1.0, FracOrder(1.3));
    BlockDiagonalOp block(inner, 3);
    CHECK(block.input_size() == 60);
    CHECK(adjoint_defect(block, gen) <= 1e-10);
    IdentityOp id(11);
    CHECK(adjoint_defect(id, gen) <= 1e-15);
}

TEST_CASE("integer_grad_power") {
    std::mt19937_64 gen(4);
    const Image u = random_image(9, 8, gen, 0.125);
    const VectorField g1 = integer_grad_power(u, 1);
    const VectorField f1 = frac_grad(u, FracOrder(1.0));
    CHECK(std::equal(g1.data().begin(), g1.data().end(), f1.data().begin()));

    for (int m = 1; m <= 3; ++m) {
        IntegerGradOp op(5, 4, 0.5, m);
        const oracle::Mat ref = oracle::integer_grad(5, 4, m, 0.5);
        CHECK((dense_of(op, false) - ref).cwiseAbs().maxCoeff() <= 1e-12 * ref.cwiseAbs().maxCoeff());
    }

    const int n = 12;
    const double h = 1.0 / (n - 1);
    Image q(n, n, h);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) q.at(i, j) = (j * h) * (j * h);
    }
    const VectorField g2 = integer_grad_power(q, 2);
    CHECK(g2.channels() == 4);
    for (int i = 2; i < n; ++i) {
        for (int j = 2; j < n; ++j) {
            const std::size_t s = static_cast<std::size_t>(i) * n + j;
            CHECK(g2.at(0, s) == doctest::Approx(2.0).epsilon(1e-9));
            for (int c = 1; c < 4; ++c) CHECK(std::abs(g2.at(c, s)) <= 1e-9);
        }
    }
    const VectorField z = integer_grad_power(Image(4, 4), 2);
    for (double x : z.data()) CHECK(x == 0.0);
    CHECK_THROWS_AS(integer_grad_power(u, 0), std::invalid_argument);
    CHECK_THROWS_AS(integer_grad_power(u, 5), std::invalid_argument);
}

TEST_CASE("operator_norm") {
    IdentityOp id(10);
    CHECK(operator_norm(id, 50, 1) == doctest::Approx(1.05).epsilon(1e-12));
    CHECK(operator_norm(ZeroOp{}, 50, 1) == 0.0);

    FracGradOp grad(8, 8, 1.0, FracOrder(1.0));
    const double est = operator_norm(grad, 400, 3);
    const oracle::Mat dense = oracle::frac_grad(8, 8, 1.0, 1.0);
    const double smax = Eigen::JacobiSVD<oracle::Mat>(dense).singularValues()(0);
    CHECK(est <= 1.05 * std::sqrt(8.0));
    CHECK(est == doctest::Approx(1.05 * smax).epsilon(1e-6));
    CHECK(operator_norm(grad, 100, 3) == operator_norm(grad, 100, 3));

    FracGradOp frac(8, 8, 1.0, FracOrder(1.5));
    const double sfrac = Eigen::JacobiSVD<oracle::Mat>(oracle::frac_grad(8, 8, 1.5, 1.0)).singularValues()(0);
    CHECK(operator_norm(frac, 400, 3) == doctest::Approx(1.05 * sfrac).epsilon(1e-6));
}

TEST_CASE("derivatives along different axes commute") {
    std::mt19937_64 gen(8);
    const Image u = random_image(10, 9, gen, 0.1);
    for (double r : {0.4, 1.0, 1.7}) {
        const VectorField g = frac_grad(u, FracOrder(r));
        const Image gy(10, 9, 0.1, std::vector<double>(g.plane(1).begin(), g.plane(1).end()));
        const Image gx(10, 9, 0.1, std::vector<double>(g.plane(0).begin(), g.plane(0).end()));
        const VectorField a = frac_grad(gy, FracOrder(r));  // x of y
        const VectorField b = frac_grad(gx, FracOrder(r));  // y of x
        double scale = 0.0;
        for (double x : a.plane(0)) scale = std::max(scale, std::abs(x));
        CHECK(max_abs_diff(a.plane(0), b.plane(1)) <= 1e-12 * scale);
    }
}

TEST_CASE("gradient norm is continuous in the order") {
    const int n = 24;
    const double h = 1.0 / (n - 1);
    Image u(n, n, h);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) u.at(i, j) = std::sin(3.1 * i * h) * std::cos(2.3 * j * h) + i * j * h * h;
    }
    const Image red = boundary_reduce(u).image;
    for (double r0 : {0.2, 0.5, 0.9, 1.3, 1.5, 1.8}) {
        const double a = norm2(frac_grad(red, FracOrder(r0)).data());
        const double b = norm2(frac_grad(red, FracOrder(r0 + 1e-3)).data());
        CHECK(std::abs(a - b) <= 1e-2 * a);
    }
}

TEST_CASE("parallel sweeps are bit-identical to the serial reference") {
#ifdef _OPENMP
    const int saved = omp_get_max_threads();
    omp_set_num_threads(4);
#endif
    std::mt19937_64 gen(17);
    for (auto [w, h] : {std::pair{130, 131}, std::pair{256, 64}, std::pair{20, 9}}) {
        const Image u = random_image(w, h, gen);
        for (double r : {0.6, 1.0, 2.3}) {
            for (Side side : {Side::left, Side::right, Side::central}) {
                for (Axis axis : {Axis::x, Axis::y}) {
                    for (bool transpose : {false, true}) {
                        AxisStencil st(FracOrder(r), side, 1.0 / (std::max(w, h) - 1), std::max(w, h));
                        std::vector<double> a(u.size()), b(u.size());
                        kernels::sweep(u.samples(), a, w, h, axis, st, transpose);
                        kernels::serial::sweep(u.samples(), b, w, h, axis, st, transpose);
                        CHECK(a == b);
                    }
                }
            }
        }
    }
#ifdef _OPENMP
    omp_set_num_threads(saved);
#endif
}

TEST_CASE("2D boundary reduction") {
    std::mt19937_64 gen(12);
    std::uniform_int_distribution<int> d(-256, 256);
    Image u(17, 9, 1.0);
    for (double& x : u.storage()) x = d(gen) / 32.0;
    const ReducedImage red = boundary_reduce(u);
    for (int i = 0; i < 9; ++i) {
        for (int j = 0; j < 17; ++j) {
            if (i == 0 || j == 0 || i == 8 || j == 16) CHECK(red.image.at(i, j) == 0.0);
        }
    }
    CHECK(boundary_restore(red.image, red.trace).storage() == u.storage());

    const Image v = random_image(13, 11, gen);
    const ReducedImage rv = boundary_reduce(v);
    CHECK(max_abs_diff(boundary_restore(rv.image, rv.trace).samples(), v.samples()) <= 1e-15);
}

TEST_CASE("thread configuration") {
    CHECK(parallel_worthwhile(kParallelThreshold));
    CHECK_FALSE(parallel_worthwhile(kParallelThreshold - 1));
    CHECK(max_threads() >= 1);
}

}
