#pragma once

#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "rsf/grid.hpp"
#include "rsf/operators.hpp"
#include "rsf/symbols.hpp"

namespace rsf {

struct ModelInput {
    std::map<std::string, GridFunction> u_init;
    // One function per forcing channel; empty when the feature set has no forcing.
    std::vector<GridFunction> xi;
};

class ModelVector {
public:
    ModelVector() = default;
    ModelVector(std::vector<std::string> keys, std::vector<GridFunction> values);

    std::size_t size() const { return keys_.size(); }
    const std::vector<std::string>& keys() const { return keys_; }
    const GridFunction& operator[](std::size_t i) const { return values_[i]; }
    const GridFunction& at(const std::string& key) const;
    bool contains(const std::string& key) const { return index_.count(key) != 0; }
    const SpaceTimeGrid& grid() const;

private:
    std::vector<std::string> keys_;
    std::vector<GridFunction> values_;
    std::unordered_map<std::string, std::size_t> index_;
};

struct EvaluateOptions {
    // Off recomputes every subtree from scratch; the results are identical, only slower.
    bool memoize = true;
};

ModelVector evaluate(const FeatureSet& fs, const ModelInput& input, const OperatorBundle& ops,
                     const EvaluateOptions& opts = {});

std::vector<double> evaluate_at(const ModelVector& mv, int k, int i);

// Row i holds the features at (t_k, x_i); columns follow the feature order.
Eigen::MatrixXd time_slice_features(const ModelVector& mv, int k);

void write_feature_csv(const ModelVector& mv, const std::vector<std::pair<int, int>>& points, const std::string& path);

// The model symbol whose d = 0 evaluation is the iterated integral S^{w_1 ... w_k}.
Symbol signature_symbol(std::span<const int> word);

// Iterated integrals up to `level` of the piecewise-linear path through the rows of `path`
// (d = 0, one column per channel), keyed by signature_symbol(word).key().
std::map<std::string, double> signature_oracle(const GridFunction& path, int level);

// Per-channel derivative of a sampled path: central differences inside, one-sided at the ends.
std::vector<GridFunction> path_derivative(const GridFunction& path);

}  // namespace rsf
