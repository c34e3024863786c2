#include "fractv/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace fractv {

namespace {

// [0, 1) with 53 random bits; std::generate_canonical is not specified bit-for-bit.
double uniform53(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

}  // namespace

std::vector<double> gaussian_samples(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; i += 2) {
        const double u1 = 1.0 - uniform53(gen);  // (0, 1]
        const double u2 = uniform53(gen);
        const double rad = std::sqrt(-2.0 * std::log(u1));
        const double ang = 2.0 * std::numbers::pi * u2;
        out[i] = rad * std::cos(ang);
        if (i + 1 < n) out[i + 1] = rad * std::sin(ang);
    }
    return out;
}

Image add_gaussian_noise(const Image& image, double sigma, std::uint64_t seed) {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
        throw std::invalid_argument("add_gaussian_noise: sigma must be finite and >= 0");
    }
    Image out = image;
    if (sigma == 0.0) return out;
    const std::vector<double> z = gaussian_samples(image.size(), seed);
    auto& s = out.storage();
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = std::clamp(s[i] + sigma * z[i], 0.0, 1.0);
    return out;
}

Image phantom(int n, double spacing) {
    if (n < 4) throw std::invalid_argument("phantom: size must be >= 4");
    Image img(n, n, spacing);
    const double m = static_cast<double>(n - 1);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double y = i / m, x = j / m;
            double v = 0.2 + 0.15 * x + 0.1 * y * y;
            if (x > 0.15 && x < 0.5 && y > 0.2 && y < 0.55) v = 0.75;
            const double dx = x - 0.68, dy = y - 0.66;
            const double rr = std::sqrt(dx * dx + dy * dy);
            if (rr < 0.22) v = 0.9 - 1.5 * rr;
            if (y > 0.78 && y < 0.86 && x > 0.12 && x < 0.45) v = 0.1;
            img.at(i, j) = std::clamp(v, 0.1, 0.9);
        }
    }
    return img;
}

}  // namespace fractv
