#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "convexify/forward.hpp"
#include "convexify/geometry.hpp"
#include "convexify/model.hpp"
#include "convexify/optimize.hpp"
#include "convexify/transform.hpp"

namespace convexify {

struct VerifySettings {
    int trials = 20;
    int pairs = 100;
    int bank = 16;
    int adversarial_trials = 200;
    std::uint64_t seed = 1;
    std::vector<double> lambdas{0, 1, 2, 4, 8, 16};
    std::vector<double> carleman_lambdas{2, 4, 8};
};

struct LandscapeSettings {
    int directions = 4;
    int points = 21;
    double span = 1.0;
    double lambda_star = -1.0;  ///< < 0: take it from the convexity scan
};

/// Everything a run needs, loaded from a flat `section.key = value` file.
struct RunConfig {
    GridSpec grid;
    CarlemanParams carleman;
    TikhonovParams tikhonov;
    CoefficientModel model;
    std::vector<double> model_a{1.0};  ///< n entries (diagonal) or n*n entries
    std::vector<double> model_b{0.0};
    GeneratorConfig forward;
    double delta = 0.0;
    std::uint64_t seed = 0;
    SmoothingConfig smoothing;
    OptimizerConfig optimize;
    double lift_cutoff = 0.0;  ///< 0 selects (d - a)/2
    std::string out_dir = "out";
    VerifySettings verify;
    std::vector<double> sweep_lambdas{0, 1, 2, 4, 8, 16};
    LandscapeSettings landscape;

    /// Re-derives dependent fields (model.n_space, model.a, model.b) and validates every section.
    void finalize();
    /// Sorted `key = value` listing of every setting; the config hash is taken over it.
    std::string canonical() const;
    std::uint64_t hash() const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
/// Applies one `key = value` assignment (used for overrides).
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& value);
std::vector<std::string> config_keys();

}  // namespace convexify
