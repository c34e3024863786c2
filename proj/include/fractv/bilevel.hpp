#pragma once

// Upper level of the training scheme: exhaustive search of a training ground for the
// parameters whose lower-level reconstruction is closest to the clean image.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fractv/grid_ops.hpp"
#include "fractv/regularizers.hpp"
#include "fractv/saddle_solver.hpp"

namespace fractv {

struct TrainingPair {
    Image u_c;
    Image u_eta;

    /// Boundary-reduces both images.
    static TrainingPair from_raw(const Image& clean, const Image& noisy);
    void validate() const;
};

/// One point of the ground, ordered lexicographically as (alpha..., r1, r2, p...).
struct ParamTuple {
    std::vector<double> alpha;
    double r1 = 1.0;
    double r2 = 1.0;
    std::vector<LpExponent> p;

    RVLSpec to_spec(double kappa) const;
    std::string to_string() const;

    friend bool operator<(const ParamTuple& a, const ParamTuple& b);
    friend bool operator==(const ParamTuple& a, const ParamTuple& b);
};

struct TrainingGround {
    std::vector<double> r1{1.0};
    std::vector<double> r2{1.0};
    std::vector<std::vector<double>> alpha{{0.0}, {0.0}};
    std::vector<std::vector<LpExponent>> p{{LpExponent(2.0)}, {LpExponent(2.0)}};
    double kappa = 1e-3;

    /// n evenly spaced samples of [lo, hi]; n = 1 gives {lo}.
    static std::vector<double> linspace(double lo, double hi, int n);

    /// Sorts and dedups every axis, then checks the box and layer invariants.
    TrainingGround normalized() const;
    void validate() const;

    int layers() const { return static_cast<int>(alpha.size()); }
    std::size_t size() const;
    /// Grid points in lexicographic order.
    std::vector<ParamTuple> points() const;

    /// Axis names in tuple order: alpha0.., r1, r2, p0..
    std::vector<std::string> axis_names() const;
    std::vector<std::size_t> axis_sizes() const;
};

struct AssessmentRecord {
    ParamTuple params;
    double assessment = 0.0;
    SolveReport report;
};

/// h^2-weighted squared L^2 distance.
double assessment(const Image& u, const Image& u_c);

struct GridSearchOptions {
    /// 0 = use the configured OpenMP thread count.
    int threads = 0;
    /// Reuse iterates along the alpha_0 axis. Off by default.
    bool warm_start = false;
    /// Keep per-iteration residual histories in the records.
    bool keep_history = false;
};

struct GridSearchResult {
    AssessmentRecord best;
    std::vector<AssessmentRecord> table;
    /// Reconstruction at the best point.
    Image best_image;

    double mav() const { return best.assessment; }
};

using RecordCache = std::map<ParamTuple, AssessmentRecord>;

/// Solves the lower level at every grid point. Throws NonConvergenceError (carrying no
/// result) when the minimum comes from an unconverged solve; see grid_search_unchecked.
GridSearchResult grid_search(const TrainingPair& pair, const TrainingGround& ground,
                             const SolverOptions& opts, const GridSearchOptions& gopts = {},
                             RecordCache* cache = nullptr);

/// Same search without the convergence check on the optimum.
GridSearchResult grid_search_unchecked(const TrainingPair& pair, const TrainingGround& ground,
                                       const SolverOptions& opts,
                                       const GridSearchOptions& gopts = {},
                                       RecordCache* cache = nullptr);

/// Minimum by value, ties to the lowest index (the lexicographically smallest tuple).
std::size_t select_best(const std::vector<AssessmentRecord>& table);

struct Landscape {
    std::string row_axis, col_axis;
    std::vector<std::string> row_values, col_values;
    /// Row-major, rows over the first free axis.
    std::vector<double> values;
    std::vector<AssessmentRecord> records;

    double minimum() const;
};

/// Assessment over a ground with exactly two non-singleton axes (or a single point).
Landscape landscape(const TrainingPair& pair, const TrainingGround& ground,
                    const SolverOptions& opts, const GridSearchOptions& gopts = {});

struct GroundSummary {
    std::string name;
    std::size_t points = 0;
    AssessmentRecord best;
};

/// MAVs over nested grounds; checks nesting and that the MAV sequence is nonincreasing.
std::vector<GroundSummary> compare_grounds(const TrainingPair& pair,
                                           const std::vector<std::pair<std::string, TrainingGround>>& grounds,
                                           const SolverOptions& opts,
                                           const GridSearchOptions& gopts = {});

/// True when every point of `inner` is a point of `outer`.
bool ground_contains(const TrainingGround& outer, const TrainingGround& inner);

std::string format_mav_table(const std::vector<GroundSummary>& rows);

}  // namespace fractv
