#include "fractv/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <set>
#include <stdexcept>

#include "fractv/errors.hpp"

namespace fractv {

namespace {

std::string trim(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

bool valid_name(const std::string& s) {
    if (s.empty()) return false;
    return std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return std::isalnum(c) || c == '_' || c == '-';
    });
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t at = s.find(sep, start);
        out.push_back(trim(std::string_view(s).substr(start, at - start)));
        if (at == std::string::npos) break;
        start = at + 1;
    }
    return out;
}

}  // namespace

Config Config::parse(std::string_view text) {
    Config cfg;
    std::string section;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view raw = text.substr(pos, end - pos);
        const std::size_t hash = raw.find('#');
        if (hash != std::string_view::npos) raw = raw.substr(0, hash);
        const std::string line = trim(raw);
        if (!line.empty()) {
            if (line.front() == '[') {
                if (line.back() != ']') throw ParseError("config: unterminated section header", pos);
                section = trim(std::string_view(line).substr(1, line.size() - 2));
                if (!valid_name(section)) throw ParseError("config: bad section name", pos);
            } else {
                const std::size_t eq = line.find('=');
                if (eq == std::string::npos) throw ParseError("config: expected key = value", pos);
                const std::string key = trim(std::string_view(line).substr(0, eq));
                const std::string value = trim(std::string_view(line).substr(eq + 1));
                if (!valid_name(key)) throw ParseError("config: bad key", pos);
                if (section.empty()) throw ParseError("config: key outside any section", pos);
                cfg.values_[section + "." + key] = value;
            }
        }
        pos = end + 1;
    }
    return cfg;
}

Config Config::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse(text);
}

void Config::set(const std::string& key, const std::string& value) {
    const std::size_t dot = key.find('.');
    if (dot == std::string::npos || !valid_name(key.substr(0, dot)) ||
        !valid_name(key.substr(dot + 1))) {
        throw std::invalid_argument("config: key must look like section.key, got '" + key + "'");
    }
    values_[key] = value;
}

void Config::apply_override(const std::string& assignment) {
    const std::size_t eq = assignment.find('=');
    if (eq == std::string::npos) {
        throw std::invalid_argument("config: override must be section.key=value");
    }
    set(trim(std::string_view(assignment).substr(0, eq)),
        trim(std::string_view(assignment).substr(eq + 1)));
}

std::string Config::get(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : parse_double(it->second, key);
}

long long Config::get_int(const std::string& key, long long fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : parse_int(it->second, key);
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const std::string& v = it->second;
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw std::invalid_argument(key + ": expected a boolean, got '" + v + "'");
}

std::vector<std::string> Config::keys() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : values_) out.push_back(k);
    return out;
}

double parse_double(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    if (t == "inf") return std::numeric_limits<double>::infinity();
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
        throw std::invalid_argument(what + ": cannot parse '" + text + "' as a number");
    }
    return v;
}

long long parse_int(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    long long v = 0;
    auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
        throw std::invalid_argument(what + ": cannot parse '" + text + "' as an integer");
    }
    return v;
}

std::vector<double> parse_axis(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    if (t.empty()) throw std::invalid_argument(what + ": empty axis");
    if (t.find(':') != std::string::npos) {
        const auto parts = split(t, ':');
        if (parts.size() != 3) throw std::invalid_argument(what + ": range must be lo:hi:count");
        const double lo = parse_double(parts[0], what);
        const double hi = parse_double(parts[1], what);
        const long long n = parse_int(parts[2], what);
        if (!std::isfinite(lo) || !std::isfinite(hi)) {
            throw std::invalid_argument(what + ": range ends must be finite");
        }
        if (n < 1 || n > 100000) throw std::invalid_argument(what + ": sample count out of range");
        return TrainingGround::linspace(lo, hi, static_cast<int>(n));
    }
    std::vector<double> out;
    for (const auto& s : split(t, ',')) {
        const double v = parse_double(s, what);
        if (std::isinf(v)) throw std::invalid_argument(what + ": 'inf' is only allowed in p axes");
        out.push_back(v);
    }
    return out;
}

std::vector<LpExponent> parse_p_axis(const std::string& text, const std::string& what) {
    const std::string t = trim(text);
    std::vector<LpExponent> out;
    try {
        if (t.find(':') != std::string::npos) {
            for (double v : parse_axis(t, what)) out.emplace_back(v);
            return out;
        }
        for (const auto& s : split(t, ',')) out.push_back(LpExponent::parse(s));
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(what + ": " + e.what());
    }
    return out;
}

RunConfig RunConfig::from(const Config& c) {
    static const std::set<std::string> known = {
        "data.clean", "data.noisy", "data.phantom_size", "data.sigma", "data.noise_seed",
        "data.spacing", "output.image", "output.csv", "output.maxval", "output.encoding",
        "model.r1", "model.r2", "model.alpha", "model.p", "model.kappa", "ground.r1",
        "ground.r2", "ground.kappa", "solver.max_iters", "solver.tol", "solver.theta",
        "solver.seed", "solver.step_safety", "solver.norm_iters", "solver.check_every",
        "search.threads", "search.warm_start", "search.keep_history", "op.name", "op.order",
        "op.side"};
    auto layered = [](const std::string& k) {
        for (const char* prefix : {"ground.alpha", "ground.p"}) {
            const std::string pre(prefix);
            if (k.size() > pre.size() && k.compare(0, pre.size(), pre) == 0 &&
                std::all_of(k.begin() + pre.size(), k.end(),
                            [](unsigned char ch) { return std::isdigit(ch); })) {
                return true;
            }
        }
        return false;
    };
    for (const auto& k : c.keys()) {
        if (!known.count(k) && !layered(k)) throw std::invalid_argument("config: unknown key '" + k + "'");
    }

    RunConfig rc;
    DataConfig& d = rc.data;
    d.clean = c.get("data.clean", d.clean);
    d.noisy = c.get("data.noisy", d.noisy);
    const long long ps = c.get_int("data.phantom_size", d.phantom_size);
    if (ps < 4 || ps > 4096) throw std::invalid_argument("data.phantom_size must be in 4..4096");
    d.phantom_size = static_cast<int>(ps);
    d.sigma = c.get_double("data.sigma", d.sigma);
    if (!(d.sigma >= 0.0) || !std::isfinite(d.sigma)) {
        throw std::invalid_argument("data.sigma must be finite and >= 0");
    }
    const long long ns = c.get_int("data.noise_seed", static_cast<long long>(d.noise_seed));
    if (ns < 0) throw std::invalid_argument("data.noise_seed must be >= 0");
    d.noise_seed = static_cast<std::uint64_t>(ns);
    d.spacing = c.get("data.spacing", d.spacing);
    if (d.spacing != "pixel" && d.spacing != "unit") {
        throw std::invalid_argument("data.spacing must be 'pixel' or 'unit'");
    }
    if (d.clean.empty()) throw std::invalid_argument("data.clean must not be empty");

    OutputConfig& o = rc.output;
    o.image = c.get("output.image", o.image);
    o.csv = c.get("output.csv", o.csv);
    const long long mv = c.get_int("output.maxval", o.maxval);
    if (mv < 1 || mv > 65535) throw std::invalid_argument("output.maxval must be in 1..65535");
    o.maxval = static_cast<int>(mv);
    o.encoding = c.get("output.encoding", o.encoding);
    if (o.encoding != "binary" && o.encoding != "ascii") {
        throw std::invalid_argument("output.encoding must be 'binary' or 'ascii'");
    }

    RVLSpec& m = rc.model;
    m.r1 = FracOrder(c.get_double("model.r1", 1.0));
    m.r2 = FracOrder(c.get_double("model.r2", 1.0));
    const std::size_t mk = static_cast<std::size_t>(std::max(m.r2.integer_part(), 0)) + 1;
    m.alpha = c.has("model.alpha") ? parse_axis(c.get("model.alpha", ""), "model.alpha")
                                   : std::vector<double>(mk, 0.0);
    if (!c.has("model.alpha")) m.alpha[0] = 0.1;
    m.p = c.has("model.p") ? parse_p_axis(c.get("model.p", ""), "model.p")
                           : std::vector<LpExponent>(mk, LpExponent(2.0));
    m.kappa = c.get_double("model.kappa", m.kappa);
    m.validate();

    TrainingGround& g = rc.ground;
    g.r1 = parse_axis(c.get("ground.r1", "1"), "ground.r1");
    g.r2 = parse_axis(c.get("ground.r2", "1"), "ground.r2");
    if (g.r2.empty() || !(g.r2.front() >= 1.0)) throw std::invalid_argument("ground.r2 must be >= 1");
    const int layers = static_cast<int>(std::floor(g.r2.front())) + 1;
    if (layers > 4) throw std::invalid_argument("ground.r2 must be < 4");
    g.alpha.assign(layers, {});
    g.p.assign(layers, {});
    for (int j = 0; j < layers; ++j) {
        const std::string ak = "ground.alpha" + std::to_string(j);
        const std::string pk = "ground.p" + std::to_string(j);
        g.alpha[j] = parse_axis(c.get(ak, j == 0 ? "0:0.4:8" : "0"), ak);
        g.p[j] = parse_p_axis(c.get(pk, "2"), pk);
    }
    for (const auto& k : c.keys()) {
        if (!layered(k)) continue;
        const std::size_t digits = k.find_first_of("0123456789");
        if (std::stoi(k.substr(digits)) >= layers) {
            throw std::invalid_argument("config: '" + k + "' exceeds the floor(r2)+1 layers of the ground");
        }
    }
    g.kappa = c.get_double("ground.kappa", g.kappa);
    g = g.normalized();

    SolverOptions& s = rc.solver;
    s.max_iters = static_cast<int>(c.get_int("solver.max_iters", s.max_iters));
    s.tol = c.get_double("solver.tol", s.tol);
    s.theta = c.get_double("solver.theta", s.theta);
    const long long seed = c.get_int("solver.seed", static_cast<long long>(s.seed));
    if (seed < 0) throw std::invalid_argument("solver.seed must be >= 0");
    s.seed = static_cast<std::uint64_t>(seed);
    s.step_safety = c.get_double("solver.step_safety", s.step_safety);
    s.norm_iters = static_cast<int>(c.get_int("solver.norm_iters", s.norm_iters));
    s.check_every = static_cast<int>(c.get_int("solver.check_every", s.check_every));
    s.validate();

    GridSearchOptions& gs = rc.search;
    const long long threads = c.get_int("search.threads", gs.threads);
    if (threads < 0 || threads > 1024) throw std::invalid_argument("search.threads must be in 0..1024");
    gs.threads = static_cast<int>(threads);
    gs.warm_start = c.get_bool("search.warm_start", gs.warm_start);
    gs.keep_history = c.get_bool("search.keep_history", gs.keep_history);

    OpConfig& op = rc.op;
    op.name = c.get("op.name", op.name);
    op.order = c.get_double("op.order", op.order);
    op.side = c.get("op.side", op.side);
    if (op.side != "left" && op.side != "right" && op.side != "central") {
        throw std::invalid_argument("op.side must be left, right or central");
    }
    if (!(op.order >= 0.0) || !std::isfinite(op.order)) {
        throw std::invalid_argument("op.order must be finite and >= 0");
    }
    return rc;
}

}  // namespace fractv
