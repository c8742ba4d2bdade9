#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rsf/grid.hpp"
#include "rsf/model.hpp"
#include "rsf/operators.hpp"
#include "rsf/regress.hpp"
#include "rsf/symbols.hpp"

namespace rsf {

struct DegreeFilter {
    DegreeConfig config;
    double gamma = std::numeric_limits<double>::infinity();
};

// ---- Algorithm 1: regression at one space-time point over many samples ----

struct Alg1Config {
    int t_index = 0;
    int x_index = 0;
    FeatureSet features;
    std::optional<DegreeFilter> degree;
    OperatorBundle bundle;
    OlsOptions ols;
    int workers = 1;
};

struct Alg1Sample {
    GridFunction u;
    ModelInput input;
};

FeatureSet alg1_features(const Alg1Config& cfg);
Eigen::MatrixXd alg1_feature_rows(const Alg1Config& cfg, const std::vector<ModelInput>& inputs);
// Fits on precomputed rows; warns when rows per feature drop below 10.
LinearFit alg1_fit(const Alg1Config& cfg, const Eigen::MatrixXd& rows, const Eigen::VectorXd& targets);
LinearFit alg1_train(const Alg1Config& cfg, const std::vector<Alg1Sample>& train);
std::vector<double> alg1_predict(const LinearFit& fit, const Alg1Config& cfg, const std::vector<ModelInput>& test);

// ---- Algorithm 4: one-step regression per x and recursive rollout ----

struct Alg4Config {
    FeatureSet features;
    double nu = 0.1;
    int substeps = 5;
    OlsOptions ols;
    std::function<void(std::span<double>)> boundary_enforce;
    int workers = 1;

    void validate() const;
};

struct Alg4Model {
    SpaceTimeGrid grid;
    std::vector<std::string> keys;
    std::vector<LinearFit> fits;  // one per spatial index
    std::size_t training_pairs = 0;
};

// Builds the model of one spatial profile u on the substep grid of [0, delta] with u^c = I_c[u]
// and returns the features at time delta (row i = point x_i).
class Alg4Features {
public:
    Alg4Features(const Alg4Config& cfg, const SpaceTimeGrid& observed);
    Eigen::MatrixXd operator()(std::span<const double> u) const;
    std::size_t size() const { return fs_.size(); }
    const FeatureSet& feature_set() const { return fs_; }

private:
    FeatureSet fs_;
    OperatorBundle ops_;
    int substeps_;
};

Alg4Model alg4_train(const Alg4Config& cfg, const std::vector<GridFunction>& train);
GridFunction alg4_predict(const Alg4Model& model, const Alg4Config& cfg, const SpatialFunction& u0);

// ---- Baselines and data utilities ----

// A rollout that may stop early when it diverges; rows past divergence are absent.
struct Rollout {
    SpaceTimeGrid grid;
    std::vector<double> values;  // completed rows, time-major
    int steps_completed = 0;
    std::optional<int> diverged_at;

    std::span<const double> row(int k) const;
    // Relative l2 error per time slice; +inf for slices that were never reached.
    std::vector<double> slice_errors(const GridFunction& truth) const;
};

struct EulerModel {
    SpaceTimeGrid grid;
    std::vector<LinearFit> fits;
};

EulerModel euler_train(const std::vector<GridFunction>& train, const OlsOptions& ols = {});
Rollout euler_predict(const EulerModel& model, const SpatialFunction& u0);

struct PdeFindFit {
    double a = 0.0;
    double b = 0.0;
    double intercept = 0.0;
    bool has_intercept = false;
    std::size_t rows = 0;
};

// Pooled OLS of the forward time difference on (u_xx, u u_x) over all samples, steps and points.
PdeFindFit pdefind_fit(const std::vector<GridFunction>& train, bool intercept = false);
// Semi-implicit simulation of u_t = a u_xx + b u u_x (+ c) on the observed spatial grid with
// `substeps` steps per observed step, restricted back to the observed times.
GridFunction pdefind_simulate(const PdeFindFit& fit, const SpatialFunction& u0, const SpaceTimeGrid& observed,
                              int substeps = 10);

enum class NoiseMode { AllPoints, InitialSlice };

// u + eps * sqrt(mean |u|) with eps ~ N(0, sd^2) i.i.d. at the selected points.
GridFunction add_noise(const GridFunction& u, double sd, std::uint64_t seed, NoiseMode mode);

// Slope of the OLS fit (with intercept) of (u_1 - u_0)/delta on the central u_xx of u_0.
double estimate_viscosity(const std::vector<GridFunction>& train);
double estimate_viscosity(const std::vector<GridFunction>& train, double delta);

// ---- Reports ----

struct CaseResult {
    std::string variant;
    int repeat = 0;
    int index = 0;
    double rel_l2 = std::numeric_limits<double>::quiet_NaN();
    double slope = std::numeric_limits<double>::quiet_NaN();
    std::string note;
};

struct Aggregate {
    std::string variant;
    std::size_t count = 0;
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
    // Extremes over repeats of the per-repeat mean.
    double repeat_mean_min = 0.0;
    double repeat_mean_max = 0.0;
    double mean_slope = std::numeric_limits<double>::quiet_NaN();
};

struct PredictionReport {
    std::string experiment;
    std::vector<CaseResult> cases;
    std::vector<Aggregate> aggregates;
    std::map<std::string, std::vector<double>> series;
    std::vector<std::string> failures;

    void recompute_aggregates();
    const Aggregate* find(const std::string& variant) const;
    std::string to_json() const;
    void write_csv(const std::string& path) const;
};

}  // namespace rsf
