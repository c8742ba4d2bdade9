#include "rsf/regress.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include <nlohmann/json.hpp>

#include "rsf/error.hpp"

namespace rsf {

LeastSquaresAccumulator::LeastSquaresAccumulator(int features, bool intercept)
    : features_(features), intercept_(intercept) {
    if (features < 0) throw ConfigError("feature count must be non-negative");
    const int c = features + (intercept ? 1 : 0) + 1;
    R_ = Eigen::MatrixXd::Zero(c, c);
}

void LeastSquaresAccumulator::add(const Eigen::Ref<const Eigen::MatrixXd>& X, const Eigen::Ref<const Eigen::VectorXd>& y) {
    if (X.cols() != features_) throw ConfigError("design matrix has the wrong number of columns");
    if (X.rows() != y.size()) throw ConfigError("design matrix and targets differ in length");
    if (X.rows() == 0) return;
    if (!X.allFinite() || !y.allFinite()) throw NumericalError("non-finite value in regression data");
    const Eigen::Index c = R_.cols();
    const Eigen::Index off = intercept_ ? 1 : 0;
    Eigen::MatrixXd S(c + X.rows(), c);
    S.topRows(c) = R_;
    auto B = S.bottomRows(X.rows());
    if (intercept_) B.col(0).setOnes();
    B.middleCols(off, features_) = X;
    B.col(c - 1) = y;
    Eigen::HouseholderQR<Eigen::Ref<Eigen::MatrixXd>> qr(S);
    R_ = S.topRows(c).triangularView<Eigen::Upper>();
    rows_ += static_cast<std::size_t>(X.rows());
}

LinearFit LeastSquaresAccumulator::solve(const OlsOptions& opts, std::vector<std::string> keys) const {
    if (rows_ == 0) throw ConfigError("least squares needs at least one row");
    if (!keys.empty() && static_cast<int>(keys.size()) != features_)
        throw ConfigError("feature key count does not match the design");
    const Eigen::Index c = R_.cols() - 1;
    const Eigen::Index off = intercept_ ? 1 : 0;
    const Eigen::Index ridge_rows = opts.ridge > 0.0 ? features_ : 0;

    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(c + ridge_rows, c);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(c + ridge_rows);
    M.topRows(c) = R_.topLeftCorner(c, c);
    rhs.head(c) = R_.col(c).head(c);
    if (ridge_rows > 0) {
        const double s = std::sqrt(opts.ridge);
        for (int j = 0; j < features_; ++j) M(c + j, off + j) = s;
    }

    Eigen::VectorXd scale = M.colwise().norm().transpose();
    for (Eigen::Index j = off; j < c; ++j)
        if (scale(j) <= opts.column_floor) {
            M.col(j).setZero();
            scale(j) = 0.0;
        }
    for (Eigen::Index j = 0; j < c; ++j)
        if (scale(j) == 0.0) scale(j) = 1.0;
    const Eigen::MatrixXd Ms = M * scale.cwiseInverse().asDiagonal();

    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
    cod.setThreshold(opts.threshold);
    cod.compute(Ms);
    const Eigen::VectorXd z = cod.solve(rhs);
    const Eigen::VectorXd b = z.cwiseQuotient(scale);

    LinearFit fit;
    fit.has_intercept = intercept_;
    fit.intercept = intercept_ ? b(0) : 0.0;
    fit.coefficients.assign(b.data() + off, b.data() + c);
    fit.feature_keys = std::move(keys);
    fit.diagnostics.rows = rows_;
    fit.diagnostics.rank = static_cast<int>(cod.rank());
    const double res_top = (M.topRows(c) * b - rhs.head(c)).norm();
    const double rho = R_(c, c);
    fit.diagnostics.residual_norm = std::sqrt(res_top * res_top + rho * rho);
    if (c > 0) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Ms);
        const auto d = qr.matrixQR().diagonal().cwiseAbs();
        const Eigen::Index r = std::max<Eigen::Index>(1, fit.diagnostics.rank);
        fit.diagnostics.condition = d(r - 1) > 0.0 ? d(0) / d(r - 1) : std::numeric_limits<double>::infinity();
    }
    return fit;
}

Eigen::VectorXd LeastSquaresAccumulator::column_norms() const {
    const Eigen::Index off = intercept_ ? 1 : 0;
    return R_.middleCols(off, features_).colwise().norm().transpose();
}

LinearFit ols_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const OlsOptions& opts,
                  std::vector<std::string> keys) {
    if (X.rows() == 0) throw ConfigError("ols_fit: empty input");
    LeastSquaresAccumulator acc(static_cast<int>(X.cols()), opts.intercept);
    acc.add(X, y);
    return acc.solve(opts, std::move(keys));
}

double predict(const LinearFit& fit, std::span<const double> row) {
    if (row.size() != fit.coefficients.size())
        throw ConfigError("feature row has " + std::to_string(row.size()) + " entries, fit expects " +
                          std::to_string(fit.coefficients.size()));
    double s = fit.intercept;
    for (std::size_t j = 0; j < row.size(); ++j) s += fit.coefficients[j] * row[j];
    return s;
}

Eigen::VectorXd predict(const LinearFit& fit, const Eigen::MatrixXd& X) {
    if (static_cast<std::size_t>(X.cols()) != fit.coefficients.size())
        throw ConfigError("design matrix width does not match the fit");
    const Eigen::Map<const Eigen::VectorXd> b(fit.coefficients.data(), static_cast<Eigen::Index>(fit.coefficients.size()));
    Eigen::VectorXd out = X * b;
    out.array() += fit.intercept;
    return out;
}

double fit_slope(std::span<const double> truth, std::span<const double> pred) {
    if (truth.size() != pred.size()) throw ConfigError("fit_slope: length mismatch");
    if (truth.size() < 2) throw ConfigError("fit_slope needs at least two points");
    const double n = static_cast<double>(truth.size());
    double mt = 0.0, mp = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        mt += truth[i];
        mp += pred[i];
    }
    mt /= n;
    mp /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        sxy += (truth[i] - mt) * (pred[i] - mp);
        sxx += (truth[i] - mt) * (truth[i] - mt);
    }
    if (!(sxx > 0.0)) throw ConfigError("fit_slope: truth has zero variance");
    return sxy / sxx;
}

std::string to_json(const LinearFit& fit) {
    nlohmann::json j;
    j["intercept"] = fit.intercept;
    j["has_intercept"] = fit.has_intercept;
    j["coefficients"] = fit.coefficients;
    j["keys"] = fit.feature_keys;
    j["diagnostics"] = {{"condition", std::isfinite(fit.diagnostics.condition) ? nlohmann::json(fit.diagnostics.condition)
                                                                                   : nlohmann::json(nullptr)},
                        {"residual_norm", fit.diagnostics.residual_norm},
                        {"rank", fit.diagnostics.rank},
                        {"rows", fit.diagnostics.rows}};
    return j.dump(2);
}

LinearFit linear_fit_from_json(const std::string& text) {
    try {
        const auto j = nlohmann::json::parse(text);
        LinearFit fit;
        fit.intercept = j.at("intercept").get<double>();
        fit.has_intercept = j.value("has_intercept", true);
        fit.coefficients = j.at("coefficients").get<std::vector<double>>();
        fit.feature_keys = j.value("keys", std::vector<std::string>{});
        if (j.contains("diagnostics")) {
            const auto& d = j["diagnostics"];
            fit.diagnostics.condition = d.value("condition", nlohmann::json(0.0)).is_null() ? std::numeric_limits<double>::infinity()
                                                                                             : d.value("condition", 0.0);
            fit.diagnostics.residual_norm = d.value("residual_norm", 0.0);
            fit.diagnostics.rank = d.value("rank", 0);
            fit.diagnostics.rows = d.value("rows", std::size_t{0});
        }
        return fit;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid linear fit json: ") + e.what());
    }
}

}  // namespace rsf
