#include "convexify/config.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "convexify/error.hpp"
#include "convexify/io.hpp"

namespace convexify {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used == v.size()) return x;
    } catch (const std::exception&) {
    }
    fail(ErrorKind::configuration, key + ": expected a number, got '" + v + "'");
}

long long to_int(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const long long x = std::stoll(v, &used);
        if (used == v.size()) return x;
    } catch (const std::exception&) {
    }
    fail(ErrorKind::configuration, key + ": expected an integer, got '" + v + "'");
}

bool to_bool(const std::string& key, const std::string& v) {
    if (v == "on" || v == "true" || v == "1") return true;
    if (v == "off" || v == "false" || v == "0") return false;
    fail(ErrorKind::configuration, key + ": expected on/off, got '" + v + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
    require(!out.empty(), ErrorKind::configuration, key + ": empty list");
    return out;
}

std::string list_str(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_double(v[i]);
    return s;
}

std::string bool_str(bool b) { return b ? "on" : "off"; }

struct Entry {
    std::function<void(RunConfig&, const std::string&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

#define CFG_DOUBLE(field)                                                                      \
    Entry {                                                                                    \
        [](RunConfig& c, const std::string& k, const std::string& v) { c.field = to_double(k, v); }, \
            [](const RunConfig& c) { return format_double(c.field); }                          \
    }
#define CFG_INT(field)                                                                                        \
    Entry {                                                                                                   \
        [](RunConfig& c, const std::string& k, const std::string& v) {                                        \
            c.field = static_cast<decltype(c.field)>(to_int(k, v));                                           \
        },                                                                                                    \
            [](const RunConfig& c) { return std::to_string(c.field); }                                        \
    }
#define CFG_BOOL(field)                                                                      \
    Entry {                                                                                  \
        [](RunConfig& c, const std::string& k, const std::string& v) { c.field = to_bool(k, v); }, \
            [](const RunConfig& c) { return bool_str(c.field); }                             \
    }
#define CFG_LIST(field)                                                                      \
    Entry {                                                                                  \
        [](RunConfig& c, const std::string& k, const std::string& v) { c.field = to_list(k, v); }, \
            [](const RunConfig& c) { return list_str(c.field); }                             \
    }

const std::map<std::string, Entry>& table() {
    static const std::map<std::string, Entry> t = {
        {"domain.n_space", CFG_INT(grid.n_space)},
        {"domain.a", CFG_DOUBLE(grid.a)},
        {"domain.d", CFG_DOUBLE(grid.d)},
        {"domain.T", CFG_DOUBLE(grid.T)},
        {"domain.epsilon", CFG_DOUBLE(grid.epsilon)},
        {"grid.n_x1", CFG_INT(grid.n_x1)},
        {"grid.n_xbar", CFG_INT(grid.n_xbar)},
        {"grid.n_t", CFG_INT(grid.n_t)},
        {"grid.fine_factor", CFG_INT(grid.fine_factor)},
        {"carleman.lambda", CFG_DOUBLE(carleman.lambda)},
        {"carleman.nu", CFG_DOUBLE(carleman.nu)},
        {"carleman.normalization",
         Entry{[](RunConfig& c, const std::string&, const std::string& v) {
                   c.carleman.normalization = parse_normalization(v);
               },
               [](const RunConfig& c) { return std::string(to_string(c.carleman.normalization)); }}},
        {"tikhonov.alpha", CFG_DOUBLE(tikhonov.alpha)},
        {"tikhonov.R", CFG_DOUBLE(tikhonov.R)},
        {"forward.generator",
         Entry{[](RunConfig& c, const std::string& k, const std::string& v) {
                   if (v == "separable")
                       c.forward.kind = GeneratorKind::separable;
                   else if (v == "eigenmode")
                       c.forward.kind = GeneratorKind::eigenmode;
                   else
                       fail(ErrorKind::configuration, k + ": expected separable or eigenmode, got '" + v + "'");
               },
               [](const RunConfig& c) {
                   return std::string(c.forward.kind == GeneratorKind::separable ? "separable" : "eigenmode");
               }}},
        {"forward.mu", CFG_DOUBLE(forward.mu)},
        {"forward.num_modes", CFG_INT(forward.eigen.num_modes)},
        {"forward.gamma", CFG_LIST(forward.eigen.gamma)},
        {"forward.exponent_cap", CFG_DOUBLE(forward.eigen.exponent_cap)},
        {"forward.b_lower", CFG_DOUBLE(model.b_lower)},
        {"forward.margin", CFG_DOUBLE(forward.margin)},
        {"model.f",
         Entry{[](RunConfig& c, const std::string&, const std::string& v) { c.model.f = ScalarProfile::parse(v); },
               [](const RunConfig& c) { return c.model.f.spec(); }}},
        {"model.c",
         Entry{[](RunConfig& c, const std::string&, const std::string& v) { c.model.c = ScalarProfile::parse(v); },
               [](const RunConfig& c) { return c.model.c.spec(); }}},
        {"model.a", CFG_LIST(model_a)},
        {"model.b", CFG_LIST(model_b)},
        {"noise.delta", CFG_DOUBLE(delta)},
        {"noise.seed", CFG_INT(seed)},
        {"noise.smooth", CFG_BOOL(smoothing.enabled)},
        {"noise.degree", CFG_INT(smoothing.degree)},
        {"noise.window", CFG_INT(smoothing.window)},
        {"optimize.max_iter", CFG_INT(optimize.max_iter)},
        {"optimize.grad_tol", CFG_DOUBLE(optimize.grad_tol)},
        {"optimize.step0", CFG_DOUBLE(optimize.step0)},
        {"optimize.backtrack", CFG_DOUBLE(optimize.backtrack)},
        {"optimize.sufficient_decrease", CFG_DOUBLE(optimize.sufficient_decrease)},
        {"optimize.restarts", CFG_INT(optimize.restarts)},
        {"optimize.start",
         Entry{[](RunConfig& c, const std::string&, const std::string& v) { c.optimize.start = parse_start_mode(v); },
               [](const RunConfig& c) { return std::string(to_string(c.optimize.start)); }}},
        {"optimize.precondition",
         Entry{[](RunConfig& c, const std::string&, const std::string& v) {
                   c.optimize.precondition = parse_preconditioner(v);
               },
               [](const RunConfig& c) { return std::string(to_string(c.optimize.precondition)); }}},
        {"optimize.stall_tol", CFG_DOUBLE(optimize.stall_tol)},
        {"optimize.refresh", CFG_INT(optimize.refresh)},
        {"optimize.lift_cutoff", CFG_DOUBLE(lift_cutoff)},
        {"output.dir",
         Entry{[](RunConfig& c, const std::string&, const std::string& v) { c.out_dir = v; },
               [](const RunConfig& c) { return c.out_dir; }}},
        {"output.timing", CFG_BOOL(optimize.timing)},
        {"verify.trials", CFG_INT(verify.trials)},
        {"verify.pairs", CFG_INT(verify.pairs)},
        {"verify.bank", CFG_INT(verify.bank)},
        {"verify.adversarial_trials", CFG_INT(verify.adversarial_trials)},
        {"verify.seed", CFG_INT(verify.seed)},
        {"verify.lambdas", CFG_LIST(verify.lambdas)},
        {"verify.carleman_lambdas", CFG_LIST(verify.carleman_lambdas)},
        {"sweep.lambdas", CFG_LIST(sweep_lambdas)},
        {"landscape.directions", CFG_INT(landscape.directions)},
        {"landscape.points", CFG_INT(landscape.points)},
        {"landscape.span", CFG_DOUBLE(landscape.span)},
        {"landscape.lambda_star", CFG_DOUBLE(landscape.lambda_star)},
    };
    return t;
}

#undef CFG_DOUBLE
#undef CFG_INT
#undef CFG_BOOL
#undef CFG_LIST

}  // namespace

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value) {
    const auto& t = table();
    const auto it = t.find(key);
    if (it == t.end()) fail(ErrorKind::configuration, "unknown configuration key '" + key + "'");
    it->second.set(cfg, key, value);
}

std::vector<std::string> config_keys() {
    std::vector<std::string> keys;
    for (const auto& [k, e] : table()) keys.push_back(k);
    return keys;
}

void RunConfig::finalize() {
    grid.validate();
    const int n = grid.n_space;
    model.n_space = n;
    const auto un = static_cast<std::size_t>(n);
    model.a = Mat3{};
    if (model_a.size() == un) {
        for (int i = 0; i < n; ++i) model.a[static_cast<std::size_t>(3 * i + i)] = model_a[static_cast<std::size_t>(i)];
    } else if (model_a.size() == un * un) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                model.a[static_cast<std::size_t>(3 * i + j)] = model_a[static_cast<std::size_t>(n * i + j)];
    } else {
        fail(ErrorKind::configuration, "model.a: expected " + std::to_string(n) + " or " + std::to_string(n * n) +
                                           " entries");
    }
    model.b = Vec3{};
    if (model_b.size() == 1 && model_b[0] == 0.0) {
    } else if (model_b.size() == un) {
        for (int i = 0; i < n; ++i) model.b[static_cast<std::size_t>(i)] = model_b[static_cast<std::size_t>(i)];
    } else {
        fail(ErrorKind::configuration, "model.b: expected " + std::to_string(n) + " entries");
    }
    carleman.validate();
    tikhonov.validate();
    smoothing.validate(grid.n_t);
    optimize.validate();
    require(delta >= 0.0 && delta < 1.0, ErrorKind::configuration, "noise.delta must be in [0, 1)");
    require(forward.margin >= 0.0, ErrorKind::configuration, "forward.margin must be >= 0");
    require(forward.eigen.exponent_cap > 0.0, ErrorKind::configuration, "forward.exponent_cap must be > 0");
    require(lift_cutoff >= 0.0, ErrorKind::configuration, "optimize.lift_cutoff must be >= 0");
    require(verify.trials >= 1 && verify.pairs >= 1 && verify.bank >= 1 && verify.adversarial_trials >= 0,
            ErrorKind::configuration, "verify counts must be positive");
    require(landscape.directions >= 1 && landscape.points >= 3 && landscape.span > 0.0, ErrorKind::configuration,
            "landscape settings out of range");
    for (double l : verify.lambdas) require(l >= 0.0, ErrorKind::configuration, "verify.lambdas must be >= 0");
    for (double l : verify.carleman_lambdas)
        require(l >= 0.0, ErrorKind::configuration, "verify.carleman_lambdas must be >= 0");
    for (double l : sweep_lambdas) require(l >= 0.0, ErrorKind::configuration, "sweep.lambdas must be >= 0");
}

std::string RunConfig::canonical() const {
    std::string out;
    for (const auto& [k, e] : table()) {
        if (k == "output.dir" || k == "output.timing") continue;
        out += k + " = " + e.get(*this) + "\n";
    }
    return out;
}

std::uint64_t RunConfig::hash() const { return fnv1a(canonical()); }

RunConfig parse_config(const std::string& text) {
    RunConfig cfg;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        require(eq != std::string::npos, ErrorKind::configuration,
                "line " + std::to_string(lineno) + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        require(seen.insert(key).second, ErrorKind::configuration, "duplicate key '" + key + "'");
        set_config_value(cfg, key, value);
    }
    cfg.finalize();
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream f(path);
    require(static_cast<bool>(f), ErrorKind::configuration, "cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str());
}

}  // namespace convexify
