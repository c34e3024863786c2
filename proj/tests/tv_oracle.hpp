#pragma once

// Dense statement of the denoising problems, for the oracle.

#include <cmath>

#include "helpers.hpp"
#include "oracle.hpp"

namespace testing_helpers {

/// |u - f|^2 + alpha c(r) h^2 sum |grad^r u|_p + kappa h^2 |grad^{floor(r)+1} u|^2
inline oracle::Problem tv_problem(const fractv::Image& f, double r, double alpha, double p,
                                  double kappa) {
    const int w = f.width(), h = f.height();
    const double sp = f.spacing();
    oracle::Problem pb;
    pb.f = to_vec(f.samples());
    pb.data_weight = 1.0;
    if (alpha > 0.0) {
        oracle::MassTerm m;
        m.K = oracle::frac_grad(w, h, r, sp);
        m.channels = 2;
        m.weight = alpha * scale_of(r) * sp * sp;
        m.p = p;
        pb.mass.push_back(m);
    }
    oracle::QuadTerm q;
    q.Q = oracle::integer_grad(w, h, static_cast<int>(std::floor(r)) + 1, sp);
    q.weight = kappa * sp * sp;
    pb.quad.push_back(q);
    return pb;
}

}  // namespace testing_helpers
