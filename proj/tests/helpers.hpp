#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "fractv/grid_ops.hpp"
#include "oracle.hpp"

namespace testing_helpers {

inline fractv::Image random_image(int w, int h, std::mt19937_64& gen, double spacing = 1.0) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    fractv::Image img(w, h, spacing);
    for (double& x : img.storage()) x = u(gen);
    return img;
}

inline std::vector<double> random_vector(std::size_t n, std::mt19937_64& gen) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v) x = u(gen);
    return v;
}

inline oracle::Vec to_vec(std::span<const double> s) {
    oracle::Vec v(static_cast<int>(s.size()));
    for (std::size_t i = 0; i < s.size(); ++i) v[static_cast<int>(i)] = s[i];
    return v;
}

inline double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

/// c(r) for two dimensions, written out independently of the library.
inline double scale_of(double r) {
    const double frac = r - std::floor(r);
    const double sigma = (frac == 0.0 && r > 0.0) ? 1.0 : frac;
    return 0.5 * sigma + 0.5;
}

}  // namespace testing_helpers
