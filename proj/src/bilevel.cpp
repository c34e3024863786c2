#include "fractv/bilevel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>
#include <stdexcept>

#include "fractv/errors.hpp"
#include "fractv/parallel.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fractv {

TrainingPair TrainingPair::from_raw(const Image& clean, const Image& noisy) {
    if (!clean.same_shape(noisy)) throw std::invalid_argument("TrainingPair: shape mismatch");
    return TrainingPair{boundary_reduce(clean).image, boundary_reduce(noisy).image};
}

void TrainingPair::validate() const {
    if (!u_c.same_shape(u_eta)) throw std::invalid_argument("TrainingPair: shape mismatch");
    if (u_c.spacing() != u_eta.spacing()) throw std::invalid_argument("TrainingPair: spacing mismatch");
}

// ---- parameter tuples ---------------------------------------------------------------------

RVLSpec ParamTuple::to_spec(double kappa) const {
    RVLSpec spec;
    spec.r1 = FracOrder(r1);
    spec.r2 = FracOrder(r2);
    spec.alpha = alpha;
    spec.p = p;
    spec.kappa = kappa;
    spec.validate();
    return spec;
}

std::string ParamTuple::to_string() const {
    std::ostringstream os;
    os << "alpha=(";
    for (std::size_t i = 0; i < alpha.size(); ++i) os << (i ? "," : "") << alpha[i];
    os << ") r=(" << r1 << "," << r2 << ") p=(";
    for (std::size_t i = 0; i < p.size(); ++i) os << (i ? "," : "") << p[i].to_string();
    os << ")";
    return os.str();
}

bool operator<(const ParamTuple& a, const ParamTuple& b) {
    if (a.alpha != b.alpha) return a.alpha < b.alpha;
    if (a.r1 != b.r1) return a.r1 < b.r1;
    if (a.r2 != b.r2) return a.r2 < b.r2;
    return std::lexicographical_compare(a.p.begin(), a.p.end(), b.p.begin(), b.p.end());
}

bool operator==(const ParamTuple& a, const ParamTuple& b) {
    return a.alpha == b.alpha && a.r1 == b.r1 && a.r2 == b.r2 && a.p == b.p;
}

// ---- training ground ----------------------------------------------------------------------

std::vector<double> TrainingGround::linspace(double lo, double hi, int n) {
    if (n < 1) throw std::invalid_argument("linspace: sample count must be >= 1");
    if (!(hi >= lo)) throw std::invalid_argument("linspace: empty interval");
    std::vector<double> v(n);
    if (n == 1) {
        v[0] = lo;
        return v;
    }
    for (int i = 0; i < n; ++i) {
        v[i] = (i == n - 1) ? hi : lo + (hi - lo) * static_cast<double>(i) / (n - 1);
    }
    return v;
}

namespace {

template <class T>
void sort_unique(std::vector<T>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

TrainingGround TrainingGround::normalized() const {
    TrainingGround g = *this;
    sort_unique(g.r1);
    sort_unique(g.r2);
    for (auto& a : g.alpha) sort_unique(a);
    for (auto& q : g.p) sort_unique(q);
    g.validate();
    return g;
}

void TrainingGround::validate() const {
    auto nonempty = [](std::size_t n, const char* what) {
        if (n == 0) throw std::invalid_argument(std::string("TrainingGround: empty axis ") + what);
    };
    nonempty(r1.size(), "r1");
    nonempty(r2.size(), "r2");
    if (alpha.empty() || alpha.size() != p.size()) {
        throw std::invalid_argument("TrainingGround: alpha and p need the same number of layers");
    }
    for (const auto& a : alpha) nonempty(a.size(), "alpha");
    for (const auto& q : p) nonempty(q.size(), "p");
    for (double r : r1) {
        if (!(r >= 1.0 && r < 4.0)) throw std::invalid_argument("TrainingGround: r1 must lie in [1,4)");
    }
    for (double r : r2) {
        if (!(r >= 1.0 && r < 4.0)) throw std::invalid_argument("TrainingGround: r2 must lie in [1,4)");
        if (static_cast<int>(std::floor(r)) + 1 != layers()) {
            throw std::invalid_argument(
                "TrainingGround: every r2 sample needs floor(r2)+1 alpha/p layers");
        }
    }
    for (const auto& a : alpha) {
        for (double v : a) {
            if (!(v >= 0.0) || !std::isfinite(v)) {
                throw std::invalid_argument("TrainingGround: alpha samples must be finite and >= 0");
            }
        }
    }
    if (!(kappa > 0.0)) throw std::invalid_argument("TrainingGround: kappa must be positive");
}

std::size_t TrainingGround::size() const {
    std::size_t n = 1;
    for (std::size_t s : axis_sizes()) n *= s;
    return n;
}

std::vector<std::string> TrainingGround::axis_names() const {
    std::vector<std::string> names;
    for (int i = 0; i < layers(); ++i) names.push_back("alpha" + std::to_string(i));
    names.push_back("r1");
    names.push_back("r2");
    for (int i = 0; i < layers(); ++i) names.push_back("p" + std::to_string(i));
    return names;
}

std::vector<std::size_t> TrainingGround::axis_sizes() const {
    std::vector<std::size_t> sizes;
    for (const auto& a : alpha) sizes.push_back(a.size());
    sizes.push_back(r1.size());
    sizes.push_back(r2.size());
    for (const auto& q : p) sizes.push_back(q.size());
    return sizes;
}

std::vector<ParamTuple> TrainingGround::points() const {
    const std::vector<std::size_t> sizes = axis_sizes();
    const int L = layers();
    std::vector<std::size_t> idx(sizes.size(), 0);
    std::vector<ParamTuple> out;
    out.reserve(size());
    while (true) {
        ParamTuple t;
        for (int i = 0; i < L; ++i) t.alpha.push_back(alpha[i][idx[i]]);
        t.r1 = r1[idx[L]];
        t.r2 = r2[idx[L + 1]];
        for (int i = 0; i < L; ++i) t.p.push_back(p[i][idx[L + 2 + i]]);
        out.push_back(std::move(t));
        // odometer, last axis fastest
        int a = static_cast<int>(sizes.size()) - 1;
        while (a >= 0 && ++idx[a] == sizes[a]) {
            idx[a] = 0;
            --a;
        }
        if (a < 0) break;
    }
    return out;
}

bool ground_contains(const TrainingGround& outer, const TrainingGround& inner) {
    const auto pts = outer.points();
    const std::set<ParamTuple> all(pts.begin(), pts.end());
    for (const auto& t : inner.points()) {
        if (!all.count(t)) return false;
    }
    return true;
}

// ---- search -------------------------------------------------------------------------------

double assessment(const Image& u, const Image& u_c) {
    if (!u.same_shape(u_c)) throw std::invalid_argument("assessment: shape mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double d = u.storage()[i] - u_c.storage()[i];
        s += d * d;
    }
    const double h = u_c.spacing();
    return h * h * s;
}

std::size_t select_best(const std::vector<AssessmentRecord>& table) {
    if (table.empty()) throw std::invalid_argument("select_best: empty table");
    std::size_t best = 0;
    for (std::size_t i = 1; i < table.size(); ++i) {
        if (table[i].assessment < table[best].assessment) best = i;
    }
    return best;
}

namespace {

struct PointSolve {
    AssessmentRecord record;
    Image u;
    SolverState state;
};

PointSolve solve_point(const TrainingPair& pair, const ParamTuple& t, double kappa,
                       const SolverOptions& opts, const SolverState* warm, bool keep_history) {
    const RVLSpec spec = t.to_spec(kappa);
    RvlDenoiseResult res = solve_rvl_denoise(pair.u_eta, spec, opts, warm);
    PointSolve out;
    out.record.params = t;
    out.record.assessment = assessment(res.u, pair.u_c);
    out.record.report = std::move(res.report);
    if (!keep_history) out.record.report.residual_history.clear();
    out.u = std::move(res.u);
    out.state = std::move(res.state);
    return out;
}

// Indices grouped by every coordinate except alpha_0, each group in alpha_0 order.
std::vector<std::vector<std::size_t>> alpha0_chains(const std::vector<ParamTuple>& pts) {
    std::map<ParamTuple, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        ParamTuple key = pts[i];
        key.alpha[0] = 0.0;
        groups[key].push_back(i);
    }
    std::vector<std::vector<std::size_t>> chains;
    for (auto& [key, idx] : groups) chains.push_back(std::move(idx));
    return chains;
}

}  // namespace

GridSearchResult grid_search_unchecked(const TrainingPair& pair, const TrainingGround& ground_in,
                                       const SolverOptions& opts, const GridSearchOptions& gopts,
                                       RecordCache* cache) {
    pair.validate();
    opts.validate();
    const TrainingGround ground = ground_in.normalized();
    const std::vector<ParamTuple> pts = ground.points();
    const std::size_t n = pts.size();

    std::vector<AssessmentRecord> table(n);
    std::vector<Image> images(n);
    std::vector<char> have(n, 0);
    if (cache) {
        for (std::size_t i = 0; i < n; ++i) {
            auto it = cache->find(pts[i]);
            if (it != cache->end()) {
                table[i] = it->second;
                have[i] = 1;
            }
        }
    }

    std::vector<std::vector<std::size_t>> chains;
    if (gopts.warm_start) {
        chains = alpha0_chains(pts);
    } else {
        for (std::size_t i = 0; i < n; ++i) chains.push_back({i});
    }
    const int threads = gopts.threads > 0 ? gopts.threads : max_threads();
    const long nchains = static_cast<long>(chains.size());
    std::vector<std::string> errors(chains.size());

#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (long c = 0; c < nchains; ++c) {
        try {
            SolverState state;
            bool have_state = false;
            for (std::size_t i : chains[c]) {
                if (have[i]) continue;
                PointSolve ps = solve_point(pair, pts[i], ground.kappa, opts,
                                            have_state ? &state : nullptr, gopts.keep_history);
                table[i] = std::move(ps.record);
                images[i] = std::move(ps.u);
                if (gopts.warm_start) {
                    state = std::move(ps.state);
                    have_state = true;
                }
            }
        } catch (const std::exception& e) {
            errors[c] = e.what();
        }
    }
    for (const auto& e : errors) {
        if (!e.empty()) throw std::invalid_argument("grid_search: " + e);
    }
    if (cache) {
        for (std::size_t i = 0; i < n; ++i) {
            if (!have[i]) cache->emplace(pts[i], table[i]);
        }
    }

    const std::size_t best = select_best(table);
    GridSearchResult out;
    out.best = table[best];
    if (images[best].size() == 0) {
        images[best] = solve_point(pair, pts[best], ground.kappa, opts, nullptr, false).u;
    }
    out.best_image = std::move(images[best]);
    out.table = std::move(table);
    return out;
}

GridSearchResult grid_search(const TrainingPair& pair, const TrainingGround& ground,
                             const SolverOptions& opts, const GridSearchOptions& gopts,
                             RecordCache* cache) {
    GridSearchResult res = grid_search_unchecked(pair, ground, opts, gopts, cache);
    if (!res.best.report.converged) {
        throw NonConvergenceError("grid_search: solve at the optimum " + res.best.params.to_string() +
                                  " did not converge");
    }
    return res;
}

// ---- landscape ----------------------------------------------------------------------------

double Landscape::minimum() const {
    if (values.empty()) throw std::invalid_argument("Landscape: empty");
    return *std::min_element(values.begin(), values.end());
}

Landscape landscape(const TrainingPair& pair, const TrainingGround& ground_in,
                    const SolverOptions& opts, const GridSearchOptions& gopts) {
    const TrainingGround ground = ground_in.normalized();
    const auto sizes = ground.axis_sizes();
    const auto names = ground.axis_names();
    std::vector<std::size_t> free;
    for (std::size_t a = 0; a < sizes.size(); ++a) {
        if (sizes[a] > 1) free.push_back(a);
    }
    if (!(free.size() == 2 || (free.empty() && ground.size() == 1))) {
        throw std::invalid_argument("landscape: ground must have exactly two free axes");
    }

    auto axis_labels = [&](std::size_t a) {
        std::vector<std::string> out;
        const int L = ground.layers();
        char buf[40];
        auto num = [&](double v) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            return std::string(buf);
        };
        if (a < static_cast<std::size_t>(L)) {
            for (double v : ground.alpha[a]) out.push_back(num(v));
        } else if (a == static_cast<std::size_t>(L)) {
            for (double v : ground.r1) out.push_back(num(v));
        } else if (a == static_cast<std::size_t>(L) + 1) {
            for (double v : ground.r2) out.push_back(num(v));
        } else {
            for (const auto& q : ground.p[a - L - 2]) out.push_back(q.to_string());
        }
        return out;
    };

    GridSearchResult res = grid_search_unchecked(pair, ground, opts, gopts);
    Landscape out;
    if (free.size() == 2) {
        out.row_axis = names[free[0]];
        out.col_axis = names[free[1]];
        out.row_values = axis_labels(free[0]);
        out.col_values = axis_labels(free[1]);
    } else {
        out.row_axis = names[0];
        out.col_axis = names[1];
        out.row_values = axis_labels(0);
        out.col_values = axis_labels(1);
    }
    for (const auto& r : res.table) out.values.push_back(r.assessment);
    out.records = std::move(res.table);
    return out;
}

// ---- nested grounds -----------------------------------------------------------------------

std::vector<GroundSummary> compare_grounds(
    const TrainingPair& pair, const std::vector<std::pair<std::string, TrainingGround>>& grounds,
    const SolverOptions& opts, const GridSearchOptions& gopts) {
    for (std::size_t i = 1; i < grounds.size(); ++i) {
        if (!ground_contains(grounds[i].second, grounds[i - 1].second)) {
            throw std::invalid_argument("compare_grounds: ground '" + grounds[i - 1].first +
                                        "' is not contained in '" + grounds[i].first + "'");
        }
    }
    RecordCache cache;
    std::vector<GroundSummary> rows;
    for (const auto& [name, g] : grounds) {
        GridSearchResult res = grid_search(pair, g, opts, gopts, &cache);
        rows.push_back(GroundSummary{name, res.table.size(), res.best});
    }
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].best.assessment > rows[i - 1].best.assessment) {
            throw InvariantError("compare_grounds: MAV increased from '" + rows[i - 1].name +
                                 "' to '" + rows[i].name + "'");
        }
    }
    return rows;
}

std::string format_mav_table(const std::vector<GroundSummary>& rows) {
    std::ostringstream os;
    os << "ground  points  MAV                      optimal parameters\n";
    for (const auto& r : rows) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%-7s %-7zu %-24.17g ", r.name.c_str(), r.points,
                      r.best.assessment);
        os << buf << r.best.params.to_string() << "\n";
    }
    return os.str();
}

}  // namespace fractv
