#pragma once

// Line-oriented run configuration:
//
//     # comment
//     [section]
//     key = value
//
// Keys are addressed as "section.key". Later assignments override earlier ones.

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "fractv/bilevel.hpp"
#include "fractv/regularizers.hpp"
#include "fractv/saddle_solver.hpp"

namespace fractv {

class Config {
public:
    static Config parse(std::string_view text);
    static Config load(const std::string& path);

    void set(const std::string& key, const std::string& value);
    /// "section.key=value"
    void apply_override(const std::string& assignment);

    bool has(const std::string& key) const { return values_.count(key) != 0; }
    std::string get(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    long long get_int(const std::string& key, long long fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<std::string> keys() const;

private:
    std::map<std::string, std::string> values_;
};

double parse_double(const std::string& text, const std::string& what);
long long parse_int(const std::string& text, const std::string& what);

/// "lo:hi:count" or a comma-separated list.
std::vector<double> parse_axis(const std::string& text, const std::string& what);
/// As parse_axis, with the token "inf" allowed in lists.
std::vector<LpExponent> parse_p_axis(const std::string& text, const std::string& what);

struct DataConfig {
    /// A PGM path or "phantom".
    std::string clean = "phantom";
    /// A PGM path; empty = synthesize from clean with Gaussian noise.
    std::string noisy;
    int phantom_size = 32;
    double sigma = 0.1;
    std::uint64_t noise_seed = 1;
    /// "pixel" (h = 1) or "unit" (h = 1/(n-1) over the longer side).
    std::string spacing = "pixel";
};

struct OutputConfig {
    std::string image;
    std::string csv;
    int maxval = 255;
    /// "binary" (P5) or "ascii" (P2).
    std::string encoding = "binary";
};

struct OpConfig {
    std::string name = "deriv-x";
    double order = 1.0;
    std::string side = "left";
};

struct RunConfig {
    DataConfig data;
    OutputConfig output;
    RVLSpec model;
    TrainingGround ground;
    SolverOptions solver;
    GridSearchOptions search;
    OpConfig op;

    /// Builds and validates every field; throws std::invalid_argument on the first problem.
    static RunConfig from(const Config& config);
};

}  // namespace fractv
