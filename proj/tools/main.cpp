#include <CLI11.hpp>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "convexify/error.hpp"
#include "convexify/io.hpp"
#include "convexify/pipeline.hpp"
#include "convexify/verify.hpp"

namespace fs = std::filesystem;
using namespace convexify;

namespace {

struct Options {
    std::string command;
    std::string config_path;
    std::string out_dir;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::optional<double> lambda;
};

RunConfig resolve_config(const Options& opt) {
    RunConfig cfg = opt.config_path.empty() ? parse_config("") : load_config(opt.config_path);
    for (const auto& kv : opt.overrides) {
        const auto eq = kv.find('=');
        require(eq != std::string::npos, ErrorKind::configuration, "--set expects key=value, got '" + kv + "'");
        set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (opt.seed) cfg.seed = *opt.seed;
    if (opt.lambda) {
        cfg.carleman.lambda = *opt.lambda;
        cfg.landscape.lambda_star = *opt.lambda;
    }
    if (!opt.out_dir.empty()) cfg.out_dir = opt.out_dir;
    cfg.finalize();
    return cfg;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary);
    require(static_cast<bool>(os), ErrorKind::configuration, "cannot write " + path.string());
    os << content;
    require(static_cast<bool>(os), ErrorKind::configuration, "write failed for " + path.string());
}

std::string dump(const nlohmann::ordered_json& j) { return j.dump(2) + "\n"; }

// Timestamps live only here, never in the data artifacts.
void append_run_log(const fs::path& dir, const std::string& command, const RunConfig& cfg, double seconds) {
    std::ofstream os(dir / "run.log", std::ios::app);
    const std::time_t now = std::time(nullptr);
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    os << stamp << " " << command << " config_hash=" << hex64(cfg.hash()) << " seconds=" << seconds << "\n";
}

void cmd_forward(const RunConfig& cfg, const fs::path& dir) {
    const SyntheticProblem p = make_problem(cfg);
    std::ostringstream traces;
    traces << artifact_header(cfg, p.grid) << "\n";
    write_traces_csv(traces, p.traces, cfg.grid.n_space);
    write_file(dir / "traces.csv", traces.str());
    std::ostringstream grid;
    grid << artifact_header(cfg, p.grid) << "\n";
    write_grid_csv(grid, p.grid, cfg.carleman);
    write_file(dir / "grid.csv", grid.str());
}

void cmd_invert(const RunConfig& cfg, const fs::path& dir) {
    const SyntheticProblem p = make_problem(cfg);
    const InversionOutcome o = run_inversion(cfg, p);
    const std::string header = artifact_header(cfg, p.grid);
    const InversionRun& best = o.runs[o.best];
    std::ostringstream history, crec;
    write_history_csv(history, best.result.history, header);
    write_c_rec_csv(crec, best.recovered, p.coeffs.c_true, p.grid, header);
    write_file(dir / "history.csv", history.str());
    write_file(dir / "c_rec.csv", crec.str());
    write_file(dir / "report.json", dump(inversion_report(cfg, p, o)));
}

void cmd_verify(const RunConfig& cfg, const fs::path& dir) {
    const Report r = run_verify_suite(cfg);
    write_file(dir / "verify.json", dump(r));
    if (!r["exact_pass"].get<bool>()) fail(ErrorKind::precondition, "exact-algebra checks failed; see verify.json");
}

void cmd_sweep(const RunConfig& cfg, const fs::path& dir) {
    const SyntheticProblem p = make_problem(cfg);
    std::ostringstream os;
    os << artifact_header(cfg, p.grid) << "\n";
    os << "lambda,final_J,rel_L2_c,iters\n";
    for (const auto& r : run_sweep(cfg, p))
        os << format_double(r.lambda) << ',' << format_double(r.final_J) << ',' << format_double(r.rel_L2_c) << ','
           << r.iters << '\n';
    write_file(dir / "sweep.csv", os.str());
}

void cmd_landscape(const RunConfig& cfg, const fs::path& dir) {
    const VerifyContext ctx = make_verify_context(cfg);
    const auto& v = cfg.verify;
    AdversarialPair adv;
    const Report conv = check_convexity(ctx, v.lambdas, v.pairs, v.seed + 3, v.adversarial_trials, &adv);
    double lambda_star = cfg.landscape.lambda_star;
    if (lambda_star < 0.0) lambda_star = conv["lambda_star"].is_null() ? v.lambdas.back() : conv["lambda_star"].get<double>();
    const LandscapeResult res = scan_landscape(ctx, lambda_star, cfg.landscape.directions, cfg.landscape.points,
                                               cfg.landscape.span, v.seed + 6, &adv);
    std::ostringstream os;
    write_landscape_csv(os, res.rows, artifact_header(cfg, ctx.grid));
    write_file(dir / "landscape.csv", os.str());
    Report j = res.report;
    j["config_hash"] = hex64(cfg.hash());
    write_file(dir / "landscape.json", dump(j));
}

int run(const Options& opt) {
    const auto t0 = std::chrono::steady_clock::now();
    const RunConfig cfg = resolve_config(opt);
    const fs::path dir(cfg.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    require(!ec && fs::is_directory(dir), ErrorKind::configuration, "cannot create output directory " + dir.string());

    if (opt.command == "forward")
        cmd_forward(cfg, dir);
    else if (opt.command == "invert")
        cmd_invert(cfg, dir);
    else if (opt.command == "verify")
        cmd_verify(cfg, dir);
    else if (opt.command == "sweep")
        cmd_sweep(cfg, dir);
    else if (opt.command == "landscape")
        cmd_landscape(cfg, dir);

    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    append_run_log(dir, opt.command, cfg, seconds);
    return 0;
}

void emit_error(const std::string& kind, const std::string& message) {
    nlohmann::ordered_json j;
    j["error"] = kind;
    j["message"] = message;
    std::cerr << j.dump() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Carleman-weighted convexification for a parabolic coefficient inverse problem"};
    app.require_subcommand(1);
    Options opt;
    const std::vector<std::pair<std::string, std::string>> commands{
        {"forward", "generate synthetic lateral Cauchy data"},
        {"invert", "recover c(x) from the generated data"},
        {"verify", "run the algebra and convexity checks"},
        {"sweep", "invert across sweep.lambdas"},
        {"landscape", "sample J along random lines at lambda = 0 and lambda*"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = app.add_subcommand(name, help);
        sub->add_option("--config", opt.config_path, "config file (section.key = value lines)");
        sub->add_option("--out", opt.out_dir, "output directory (overrides output.dir)");
        sub->add_option("--seed", opt.seed, "noise seed (overrides noise.seed)");
        sub->add_option("--lambda", opt.lambda, "Carleman parameter (overrides carleman.lambda)");
        sub->add_option("--set", opt.overrides, "extra key=value overrides");
        sub->callback([&opt, name = name] { opt.command = name; });
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        emit_error("usage", e.what());
        return 2;
    }
    try {
        return run(opt);
    } catch (const Error& e) {
        emit_error(to_string(e.kind()), e.what());
        return 1;
    } catch (const std::exception& e) {
        emit_error("internal", e.what());
        return 1;
    }
}
