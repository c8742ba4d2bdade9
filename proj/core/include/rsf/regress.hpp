#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace rsf {

struct OlsOptions {
    bool intercept = true;
    // Pivots below threshold * largest pivot are treated as zero (minimum-norm solution).
    double threshold = 1e-10;
    double ridge = 0.0;
    // Feature columns whose l2 norm is at most this are dropped (coefficient 0). Lets a caller with
    // a global sense of scale discard columns that carry only round-off, which column scaling would
    // otherwise blow up to unit size.
    double column_floor = 0.0;
};

struct FitDiagnostics {
    double condition = 0.0;
    double residual_norm = 0.0;
    int rank = 0;
    std::size_t rows = 0;
};

struct LinearFit {
    double intercept = 0.0;
    bool has_intercept = true;
    std::vector<double> coefficients;
    std::vector<std::string> feature_keys;
    FitDiagnostics diagnostics;
};

LinearFit ols_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const OlsOptions& opts = {},
                  std::vector<std::string> keys = {});

double predict(const LinearFit& fit, std::span<const double> row);
Eigen::VectorXd predict(const LinearFit& fit, const Eigen::MatrixXd& X);

// Slope of the 1-D least-squares line of pred against truth.
double fit_slope(std::span<const double> truth, std::span<const double> pred);

std::string to_json(const LinearFit& fit);
LinearFit linear_fit_from_json(const std::string& text);

// Streaming least squares: keeps only the triangular factor of [1 X y], so arbitrarily many
// rows can be added in blocks with memory independent of the row count.
class LeastSquaresAccumulator {
public:
    LeastSquaresAccumulator(int features, bool intercept);

    void add(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& y);
    LinearFit solve(const OlsOptions& opts = {}, std::vector<std::string> keys = {}) const;
    std::size_t rows() const { return rows_; }
    // l2 norms of the feature columns added so far.
    Eigen::VectorXd column_norms() const;
    int features() const { return features_; }

private:
    int features_;
    bool intercept_;
    std::size_t rows_ = 0;
    Eigen::MatrixXd R_;
};

}  // namespace rsf
