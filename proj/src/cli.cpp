#include "fractv/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "fractv/bilevel.hpp"
#include "fractv/config.hpp"
#include "fractv/csv.hpp"
#include "fractv/errors.hpp"
#include "fractv/noise.hpp"
#include "fractv/parallel.hpp"
#include "fractv/pgm.hpp"
#include "fractv/selftest.hpp"

namespace fractv {

namespace {

struct CommonFlags {
    std::string config;
    std::vector<std::string> sets;
    std::string clean, noisy, image, csv;
    std::optional<double> sigma;
    std::optional<long long> noise_seed, threads, max_iters;
    std::optional<double> tol;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("-c,--config", f.config, "Configuration file");
    cmd->add_option("--set", f.sets, "Override a configuration key: section.key=value");
    cmd->add_option("--clean", f.clean, "Clean image (PGM path or 'phantom')");
    cmd->add_option("--noisy", f.noisy, "Noisy image (PGM path); synthesized when absent");
    cmd->add_option("-o,--out", f.image, "Output image (PGM)");
    cmd->add_option("--csv", f.csv, "Output table (CSV)");
    cmd->add_option("--sigma", f.sigma, "Noise level used when synthesizing the noisy image");
    cmd->add_option("--noise-seed", f.noise_seed, "Seed of the synthetic noise");
    cmd->add_option("--threads", f.threads, "Worker threads for grid searches (0 = auto)");
    cmd->add_option("--max-iters", f.max_iters, "Solver iteration limit");
    cmd->add_option("--tol", f.tol, "Solver residual tolerance");
}

Config gather(const CommonFlags& f) {
    Config c = f.config.empty() ? Config() : Config::load(f.config);
    for (const auto& s : f.sets) c.apply_override(s);
    if (!f.clean.empty()) c.set("data.clean", f.clean);
    if (!f.noisy.empty()) c.set("data.noisy", f.noisy);
    if (!f.image.empty()) c.set("output.image", f.image);
    if (!f.csv.empty()) c.set("output.csv", f.csv);
    if (f.sigma) c.set("data.sigma", format_number(*f.sigma));
    if (f.noise_seed) c.set("data.noise_seed", std::to_string(*f.noise_seed));
    if (f.threads) c.set("search.threads", std::to_string(*f.threads));
    if (f.max_iters) c.set("solver.max_iters", std::to_string(*f.max_iters));
    if (f.tol) c.set("solver.tol", format_number(*f.tol));
    return c;
}

Image with_spacing(const Image& img, const std::string& mode) {
    const double h = mode == "unit" ? 1.0 / (std::max(img.width(), img.height()) - 1) : 1.0;
    return Image(img.width(), img.height(), h, img.storage());
}

struct Inputs {
    std::optional<Image> clean;
    Image noisy;
};

// The clean image is loaded when named explicitly or when the noisy image is synthesized.
Inputs load_inputs(const RunConfig& rc, const Config& c) {
    const DataConfig& d = rc.data;
    Inputs in;
    const bool want_clean = c.has("data.clean") || d.noisy.empty();
    if (want_clean) {
        in.clean = d.clean == "phantom" ? phantom(d.phantom_size) : read_pgm(d.clean);
        in.clean = with_spacing(*in.clean, d.spacing);
    }
    if (d.noisy.empty()) {
        in.noisy = add_gaussian_noise(*in.clean, d.sigma, d.noise_seed);
    } else {
        in.noisy = with_spacing(read_pgm(d.noisy), d.spacing);
    }
    if (in.clean && !in.clean->same_shape(in.noisy)) {
        throw std::invalid_argument("clean and noisy images differ in size");
    }
    return in;
}

PgmEncoding encoding(const RunConfig& rc) {
    return rc.output.encoding == "ascii" ? PgmEncoding::ascii : PgmEncoding::binary;
}

void report_line(std::ostream& out, const char* key, double v) {
    out << key << ' ' << format_number(v) << '\n';
}

int cmd_denoise(const Config& c, std::ostream& out) {
    const RunConfig rc = RunConfig::from(c);
    const Inputs in = load_inputs(rc, c);
    const ReducedImage reduced = boundary_reduce(in.noisy);
    const RvlDenoiseResult res = solve_rvl_denoise(reduced.image, rc.model, rc.solver);
    if (!rc.output.image.empty()) {
        write_pgm(rc.output.image, boundary_restore(res.u, reduced.trace), rc.output.maxval,
                  encoding(rc));
    }
    out << "iterations " << res.report.iterations << '\n';
    out << "converged " << (res.report.converged ? 1 : 0) << '\n';
    report_line(out, "objective", res.report.objective);
    report_line(out, "regularizer", res.report.regularizer_value);
    if (in.clean) {
        report_line(out, "assessment", assessment(res.u, boundary_reduce(*in.clean).image));
    }
    return res.report.converged ? kExitOk : kExitNonConvergence;
}

TrainingPair training_pair(const RunConfig& rc, const Config& c) {
    Inputs in = load_inputs(rc, c);
    if (!in.clean) throw std::invalid_argument("training needs a clean image (data.clean)");
    return TrainingPair::from_raw(*in.clean, in.noisy);
}

int cmd_train(const Config& c, std::ostream& out) {
    const RunConfig rc = RunConfig::from(c);
    const Inputs in = load_inputs(rc, c);
    if (!in.clean) throw std::invalid_argument("training needs a clean image (data.clean)");
    const TrainingPair pair = TrainingPair::from_raw(*in.clean, in.noisy);
    const GridSearchResult res = grid_search(pair, rc.ground, rc.solver, rc.search);
    if (!rc.output.csv.empty()) write_text(rc.output.csv, records_csv(res.table));
    if (!rc.output.image.empty()) {
        const Image restored = boundary_restore(res.best_image, boundary_reduce(in.noisy).trace);
        write_pgm(rc.output.image, restored, rc.output.maxval, encoding(rc));
    }
    out << "points " << res.table.size() << '\n';
    report_line(out, "mav", res.mav());
    out << "best " << res.best.params.to_string() << '\n';
    return kExitOk;
}

int cmd_landscape(const Config& c, std::ostream& out) {
    const RunConfig rc = RunConfig::from(c);
    const TrainingPair pair = training_pair(rc, c);
    const Landscape land = landscape(pair, rc.ground, rc.solver, rc.search);
    if (!rc.output.csv.empty()) write_text(rc.output.csv, records_csv(land.records));
    out << "rows " << land.records.size() << '\n';
    out << "axes " << land.row_axis << ' ' << land.col_axis << '\n';
    report_line(out, "minimum", land.minimum());
    return kExitOk;
}

Side side_of(const std::string& s) {
    if (s == "right") return Side::right;
    if (s == "central") return Side::central;
    return Side::left;
}

// 1D operator along every row (x) or column (y).
Image along_lines(const Image& u, Axis axis, const std::function<Signal1D(const Signal1D&)>& f) {
    Image out(u.width(), u.height(), u.spacing());
    const int lines = axis == Axis::x ? u.height() : u.width();
    const int len = axis == Axis::x ? u.width() : u.height();
    for (int l = 0; l < lines; ++l) {
        Signal1D s;
        s.h = u.spacing();
        s.samples.resize(len);
        for (int t = 0; t < len; ++t) s.samples[t] = axis == Axis::x ? u.at(l, t) : u.at(t, l);
        const Signal1D r = f(s);
        for (int t = 0; t < len; ++t) (axis == Axis::x ? out.at(l, t) : out.at(t, l)) = r.samples[t];
    }
    return out;
}

int cmd_apply_op(const Config& c, std::ostream& out) {
    const RunConfig rc = RunConfig::from(c);
    const DataConfig& d = rc.data;
    const std::string src = d.noisy.empty() ? d.clean : d.noisy;
    const Image u = with_spacing(src == "phantom" ? phantom(d.phantom_size) : read_pgm(src), d.spacing);
    const OpConfig& op = rc.op;
    const Side side = side_of(op.side);
    Image result;
    if (op.name == "deriv-x" || op.name == "deriv-y") {
        const Axis axis = op.name == "deriv-x" ? Axis::x : Axis::y;
        const FracOrder r(op.order);
        result = along_lines(u, axis, [&](const Signal1D& s) { return frac_deriv(s, r, side); });
    } else if (op.name == "integral-x" || op.name == "integral-y") {
        if (side == Side::central) throw std::invalid_argument("integrals are left or right sided");
        const Axis axis = op.name == "integral-x" ? Axis::x : Axis::y;
        result = along_lines(u, axis, [&](const Signal1D& s) { return frac_integral(s, op.order, side); });
    } else if (op.name == "reduce") {
        result = boundary_reduce(u).image;
    } else if (op.name == "tv") {
        report_line(out, "tv", tv_r_lp(boundary_reduce(u).image, FracOrder(op.order), rc.model.p[0]));
        return kExitOk;
    } else {
        throw std::invalid_argument("unknown operator '" + op.name +
                                    "' (deriv-x, deriv-y, integral-x, integral-y, reduce, tv)");
    }
    if (!rc.output.csv.empty()) write_text(rc.output.csv, matrix_csv(result));
    if (!rc.output.image.empty()) write_pgm(rc.output.image, result, rc.output.maxval, encoding(rc));
    const auto [lo, hi] = std::minmax_element(result.storage().begin(), result.storage().end());
    report_line(out, "min", *lo);
    report_line(out, "max", *hi);
    return kExitOk;
}

int cmd_selftest(std::ostream& out) {
    int failures = 0;
    for (const auto& chk : run_selftest()) {
        out << (chk.passed ? "PASS " : "FAIL ") << chk.name;
        if (!chk.passed) {
            out << ": " << chk.detail;
            ++failures;
        }
        out << '\n';
    }
    out << (failures ? std::to_string(failures) + " check(s) failed" : "all checks passed") << '\n';
    return failures ? kExitInvariant : kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Fractional-order total variation denoising and parameter training"};
    app.require_subcommand(1);
    CommonFlags flags;
    std::string op_name;
    std::optional<double> op_order;
    std::string op_side;

    auto* denoise = app.add_subcommand("denoise", "Solve the denoising problem once");
    auto* train = app.add_subcommand("train", "Grid search over the training ground");
    auto* land = app.add_subcommand("landscape", "Assessment values over a two-axis ground");
    auto* apply = app.add_subcommand("apply-op", "Apply a fractional operator to an image");
    auto* self = app.add_subcommand("selftest", "Run the invariant checks");
    for (auto* cmd : {denoise, train, land, apply}) add_common(cmd, flags);
    apply->add_option("--op", op_name, "deriv-x, deriv-y, integral-x, integral-y, reduce or tv");
    apply->add_option("--order", op_order, "Operator order");
    apply->add_option("--side", op_side, "left, right or central");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitValidation;
    }

    try {
        configure_threads();
        if (self->parsed()) return cmd_selftest(out);
        Config c = gather(flags);
        if (!op_name.empty()) c.set("op.name", op_name);
        if (op_order) c.set("op.order", format_number(*op_order));
        if (!op_side.empty()) c.set("op.side", op_side);
        if (denoise->parsed()) return cmd_denoise(c, out);
        if (train->parsed()) return cmd_train(c, out);
        if (land->parsed()) return cmd_landscape(c, out);
        return cmd_apply_op(c, out);
    } catch (const NonConvergenceError& e) {
        err << "error: " << e.what() << '\n';
        return kExitNonConvergence;
    } catch (const InvariantError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvariant;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }
}

}  // namespace fractv
