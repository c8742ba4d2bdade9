#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rsf/grid.hpp"
#include "rsf/learn.hpp"
#include "rsf/symbols.hpp"

namespace rsf {

struct FeatureConfig {
    int n = 1;
    Alpha alpha;
    std::vector<std::string> J;
    DegreeConfig degree;
    std::optional<double> gamma;

    bool operator==(const FeatureConfig&) const = default;
};

struct ExperimentConfig {
    // parabolic-mult | parabolic-add | wave | burgers | signature-check
    std::string experiment = "parabolic-mult";
    SpaceTimeGrid grid{0.0, 1.0, 1000, 0.0, 1.0, 100, 1, true};
    // Viscosity of the data-generating equation and of the heat operator in the model.
    double nu = 1.0;

    FeatureConfig features;
    // Alternative initialising sets evaluated side by side (wave ablations); empty = features.J only.
    std::vector<std::vector<std::string>> j_variants;
    // Heights reported for Algorithm 1 (columns of the height-n model with height <= h).
    std::vector<int> heights;
    // Algorithm 1 prediction points (t, x) in physical coordinates.
    std::vector<std::pair<double, double>> points;

    int samples = 1000;
    int train = 700;
    int test = 300;
    int repeats = 10;
    double scale = 1.0;
    std::uint64_t seed = 1;
    int workers = 0;  // 0 = all logical cores

    double ridge = 0.0;
    bool intercept = true;

    // Burgers only.
    SpaceTimeGrid fine_grid{0.0, 10.0, 2000, -8.0, 8.0, 1024, 1, true};
    std::vector<double> lambdas{8.0, 4.0, 2.0};
    int modes = 10;
    int substeps = 5;
    double noise_sd = 0.01;
    // alg4, alg4-noisy, alg4-nu-estimated, euler, pdefind, pdefind-noisy
    std::vector<std::string> variants;
    int pdefind_substeps = 10;
    bool pdefind_intercept = false;
    int euler_horizon = 20;

    // Signature check only.
    std::vector<int> path_dims{2, 3};
    int paths = 20;
    int path_pieces = 6;
    int steps_per_piece = 2000;

    bool operator==(const ExperimentConfig&) const = default;

    void validate() const;
    int scaled_samples() const;
    int scaled_train() const;
    int scaled_test() const;
    int worker_count() const;
};

std::vector<std::string> preset_names();
ExperimentConfig preset(const std::string& name);

std::string to_json(const ExperimentConfig& cfg);
// Missing fields take the preset defaults of the named experiment.
ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

// (t, x) in physical coordinates -> grid indices; throws if the point is not on the grid.
std::pair<int, int> grid_point(const SpaceTimeGrid& g, double t, double x);

// Builds the feature set of cfg.features with J replaced by `J`.
FeatureSet experiment_features(const ExperimentConfig& cfg, const std::vector<std::string>& J);

// ---- data ----

// Sample i of a forced experiment: noise seed, forcing, solution and model input.
GridFunction experiment_noise(const ExperimentConfig& cfg, int index);
GridFunction experiment_solution(const ExperimentConfig& cfg, const GridFunction& xi);
ModelInput experiment_input(const ExperimentConfig& cfg, const std::vector<std::string>& J, GridFunction xi);

// Burgers: initial condition of sample i on the fine grid and its downsampled solution.
double burgers_lambda(const ExperimentConfig& cfg, int index);
SpatialFunction burgers_initial(const ExperimentConfig& cfg, int index);
GridFunction burgers_sample(const ExperimentConfig& cfg, int index);

// Where samples come from: a generated dataset directory or on-the-fly solves.
class SampleStore {
public:
    explicit SampleStore(ExperimentConfig cfg, std::optional<std::filesystem::path> dir = std::nullopt);
    const ExperimentConfig& config() const { return cfg_; }
    GridFunction solution(int index) const;

private:
    ExperimentConfig cfg_;
    std::optional<std::filesystem::path> dir_;
};

// ---- commands ----

// Writes meta.json, split.json and samples/ under `out`. Regenerating with the same config
// rewrites identical bytes.
void generate_dataset(const ExperimentConfig& cfg, const std::filesystem::path& out);
// Reads the config stored with a dataset.
ExperimentConfig dataset_config(const std::filesystem::path& dir);

struct RunOptions {
    std::optional<std::filesystem::path> out;  // artifacts are written only when set
    bool svg = false;
};

PredictionReport run_experiment(const SampleStore& store, const RunOptions& opts = {});

struct SignatureCheckResult {
    int dim = 0;
    int path = 0;
    double rel_error = 0.0;
};

std::vector<SignatureCheckResult> signature_check(const ExperimentConfig& cfg, bool inject_fault = false);

}  // namespace rsf
