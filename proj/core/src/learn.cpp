#include "rsf/learn.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rsf/error.hpp"
#include "rsf/log.hpp"
#include "rsf/parallel.hpp"
#include "rsf/random.hpp"

namespace rsf {

namespace {

constexpr std::uint64_t kObservationNoiseStream = 3;
// Relative size below which a regression column is taken to be pure round-off.
constexpr double kRoundoffColumn = 1e-9;

// Locations where the data vanish identically (nodes of odd initial conditions, say) give
// columns of pure round-off; they are judged against the largest column anywhere on the grid.
OlsOptions with_roundoff_floor(OlsOptions ols, const std::vector<LeastSquaresAccumulator>& acc) {
    double largest = 0.0;
    for (const auto& a : acc)
        if (a.features() > 0) largest = std::max(largest, a.column_norms().maxCoeff());
    ols.column_floor = std::max(ols.column_floor, kRoundoffColumn * largest);
    return ols;
}

void require_same_grid(const std::vector<GridFunction>& data, const char* what) {
    if (data.empty()) throw ConfigError(std::string(what) + " needs at least one training sample");
    for (const auto& u : data)
        if (!(u.grid() == data.front().grid())) throw ConfigError(std::string(what) + ": samples are on different grids");
}

}  // namespace

// ---------------------------------------------------------------- Algorithm 1

FeatureSet alg1_features(const Alg1Config& cfg) {
    if (!cfg.degree) return cfg.features;
    return filter_by_degree(cfg.features, cfg.degree->config, cfg.degree->gamma);
}

Eigen::MatrixXd alg1_feature_rows(const Alg1Config& cfg, const std::vector<ModelInput>& inputs) {
    const FeatureSet fs = alg1_features(cfg);
    const auto& g = cfg.bundle.grid();
    if (cfg.t_index < 0 || cfg.t_index >= g.nt() || cfg.x_index < 0 || cfg.x_index >= g.nx)
        throw ConfigError("Algorithm 1 point is not on the grid");
    Eigen::MatrixXd rows(static_cast<Eigen::Index>(inputs.size()), static_cast<Eigen::Index>(fs.size()));
    parallel_for(inputs.size(), cfg.workers, [&](std::size_t s) {
        try {
            const auto mv = evaluate(fs, inputs[s], cfg.bundle);
            const auto r = evaluate_at(mv, cfg.t_index, cfg.x_index);
            for (std::size_t j = 0; j < r.size(); ++j)
                rows(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(j)) = r[j];
        } catch (const NumericalError& e) {
            throw e.annotated("sample " + std::to_string(s));
        }
    });
    return rows;
}

LinearFit alg1_fit(const Alg1Config& cfg, const Eigen::MatrixXd& rows, const Eigen::VectorXd& targets) {
    const auto p = static_cast<double>(std::max<Eigen::Index>(1, rows.cols()));
    const double ratio = static_cast<double>(rows.rows()) / p;
    if (ratio < 10.0) {
        std::ostringstream os;
        os << std::setprecision(3) << "training cases per feature is " << ratio << " (" << rows.rows() << " / "
           << rows.cols() << "), below the recommended 10";
        log::warn(os.str());
    }
    return ols_fit(rows, targets, cfg.ols, alg1_features(cfg).keys());
}

LinearFit alg1_train(const Alg1Config& cfg, const std::vector<Alg1Sample>& train) {
    if (train.empty()) throw ConfigError("Algorithm 1 needs training samples");
    std::vector<ModelInput> inputs;
    inputs.reserve(train.size());
    Eigen::VectorXd y(static_cast<Eigen::Index>(train.size()));
    for (std::size_t s = 0; s < train.size(); ++s) {
        if (!(train[s].u.grid() == cfg.bundle.grid())) throw ConfigError("training sample is not on the operator grid");
        inputs.push_back(train[s].input);
        y(static_cast<Eigen::Index>(s)) = train[s].u(cfg.t_index, cfg.x_index);
    }
    return alg1_fit(cfg, alg1_feature_rows(cfg, inputs), y);
}

std::vector<double> alg1_predict(const LinearFit& fit, const Alg1Config& cfg, const std::vector<ModelInput>& test) {
    const Eigen::MatrixXd rows = alg1_feature_rows(cfg, test);
    const Eigen::VectorXd p = predict(fit, rows);
    return std::vector<double>(p.data(), p.data() + p.size());
}

// ---------------------------------------------------------------- Algorithm 4

void Alg4Config::validate() const {
    if (features.alpha.p != 0 || features.alpha.l != 0 || features.uses_forcing())
        throw ConfigError("Algorithm 4 needs a model without forcing (p = l = 0)");
    if (features.J != std::vector<std::string>{"c"})
        throw ConfigError("Algorithm 4 models use the single initialising symbol c");
    if (!(nu > 0.0)) throw ConfigError("Algorithm 4 needs a positive viscosity");
    if (substeps < 1) throw ConfigError("Algorithm 4 needs at least one substep");
}

Alg4Features::Alg4Features(const Alg4Config& cfg, const SpaceTimeGrid& observed)
    : fs_(cfg.features), substeps_(cfg.substeps) {
    cfg.validate();
    ops_ = OperatorBundle::heat(substep_grid(observed, cfg.substeps), cfg.nu);
}

Eigen::MatrixXd Alg4Features::operator()(std::span<const double> u) const {
    ModelInput in;
    in.u_init.emplace("c", ops_.initial_flow(u));
    const auto mv = evaluate(fs_, in, ops_);
    return time_slice_features(mv, substeps_);
}

Alg4Model alg4_train(const Alg4Config& cfg, const std::vector<GridFunction>& train) {
    require_same_grid(train, "Algorithm 4");
    const auto& g = train.front().grid();
    const Alg4Features features(cfg, g);
    const int p = static_cast<int>(features.size());
    const int N = g.N;
    const auto nx = static_cast<std::size_t>(g.nx);

    std::vector<LeastSquaresAccumulator> acc(nx, LeastSquaresAccumulator(p, cfg.ols.intercept));
    std::vector<Eigen::MatrixXd> slab(static_cast<std::size_t>(N));
    for (std::size_t s = 0; s < train.size(); ++s) {
        const auto& u = train[s];
        try {
            parallel_for(static_cast<std::size_t>(N), cfg.workers,
                         [&](std::size_t k) { slab[k] = features(u.row(static_cast<int>(k))); });
        } catch (const NumericalError& e) {
            throw e.annotated("training sample " + std::to_string(s));
        }
        parallel_for(nx, cfg.workers, [&](std::size_t i) {
            Eigen::MatrixXd X(N, p);
            Eigen::VectorXd y(N);
            for (int k = 0; k < N; ++k) {
                X.row(k) = slab[static_cast<std::size_t>(k)].row(static_cast<Eigen::Index>(i));
                y(k) = u(k + 1, static_cast<int>(i));
            }
            acc[i].add(X, y);
        });
    }

    Alg4Model model;
    model.grid = g;
    model.keys = features.feature_set().keys();
    model.training_pairs = static_cast<std::size_t>(N) * train.size();
    model.fits.resize(nx);
    const OlsOptions ols = with_roundoff_floor(cfg.ols, acc);
    parallel_for(nx, cfg.workers, [&](std::size_t i) { model.fits[i] = acc[i].solve(ols, model.keys); });
    return model;
}

GridFunction alg4_predict(const Alg4Model& model, const Alg4Config& cfg, const SpatialFunction& u0) {
    const auto& g = model.grid;
    if (u0.size() != static_cast<std::size_t>(g.nx)) throw ConfigError("initial condition does not match the model grid");
    if (model.fits.size() != static_cast<std::size_t>(g.nx)) throw ConfigError("Algorithm 4 model lacks per-x fits");
    const Alg4Features features(cfg, g);
    if (features.feature_set().keys() != model.keys) throw ConfigError("Algorithm 4 config and trained model disagree");
    std::vector<double> out(g.size());
    std::copy(u0.values().begin(), u0.values().end(), out.begin());
    for (int k = 0; k < g.N; ++k) {
        std::span<const double> cur(out.data() + static_cast<std::size_t>(k) * g.nx, static_cast<std::size_t>(g.nx));
        std::span<double> next(out.data() + static_cast<std::size_t>(k + 1) * g.nx, static_cast<std::size_t>(g.nx));
        Eigen::MatrixXd F;
        try {
            F = features(cur);
        } catch (const NumericalError&) {
            throw NumericalError("Algorithm 4 rollout diverged: features of the predicted slice are not finite", k + 1);
        }
        for (int i = 0; i < g.nx; ++i) {
            const auto& fit = model.fits[static_cast<std::size_t>(i)];
            double v = fit.intercept;
            for (std::size_t j = 0; j < fit.coefficients.size(); ++j)
                v += fit.coefficients[j] * F(i, static_cast<Eigen::Index>(j));
            next[static_cast<std::size_t>(i)] = v;
        }
        if (cfg.boundary_enforce) cfg.boundary_enforce(next);
        for (double v : next)
            if (!std::isfinite(v)) throw NumericalError("Algorithm 4 rollout diverged", k + 1);
    }
    return GridFunction(g, std::move(out));
}

// ---------------------------------------------------------------- baselines

std::span<const double> Rollout::row(int k) const {
    if (k < 0 || k > steps_completed) throw ConfigError("rollout row was not computed");
    return {values.data() + static_cast<std::size_t>(k) * grid.nx, static_cast<std::size_t>(grid.nx)};
}

std::vector<double> Rollout::slice_errors(const GridFunction& truth) const {
    if (!(truth.grid() == grid)) throw ConfigError("rollout and truth are on different grids");
    std::vector<double> e(static_cast<std::size_t>(grid.nt()), std::numeric_limits<double>::infinity());
    for (int k = 0; k <= steps_completed; ++k) {
        double num = 0.0, den = 0.0;
        auto p = row(k);
        auto t = truth.row(k);
        for (std::size_t i = 0; i < t.size(); ++i) {
            num += (p[i] - t[i]) * (p[i] - t[i]);
            den += t[i] * t[i];
        }
        e[static_cast<std::size_t>(k)] = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
    }
    return e;
}

namespace {

Eigen::MatrixXd euler_row_features(std::span<const double> u, double dx) {
    const std::size_t n = u.size();
    std::vector<double> d1(n), d2(n);
    central_d1(u, d1, dx);
    central_d2(u, d2, dx);
    Eigen::MatrixXd F(static_cast<Eigen::Index>(n), 3);
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        F(r, 0) = u[i];
        F(r, 1) = d2[i];
        F(r, 2) = u[i] * d1[i];
    }
    return F;
}

}  // namespace

EulerModel euler_train(const std::vector<GridFunction>& train, const OlsOptions& ols) {
    require_same_grid(train, "Euler baseline");
    const auto& g = train.front().grid();
    const auto nx = static_cast<std::size_t>(g.nx);
    std::vector<LeastSquaresAccumulator> acc(nx, LeastSquaresAccumulator(3, ols.intercept));
    for (const auto& u : train) {
        std::vector<Eigen::MatrixXd> F(static_cast<std::size_t>(g.N));
        for (int k = 0; k < g.N; ++k) F[static_cast<std::size_t>(k)] = euler_row_features(u.row(k), g.dx());
        for (std::size_t i = 0; i < nx; ++i) {
            Eigen::MatrixXd X(g.N, 3);
            Eigen::VectorXd y(g.N);
            for (int k = 0; k < g.N; ++k) {
                X.row(k) = F[static_cast<std::size_t>(k)].row(static_cast<Eigen::Index>(i));
                y(k) = u(k + 1, static_cast<int>(i));
            }
            acc[i].add(X, y);
        }
    }
    EulerModel m;
    m.grid = g;
    const OlsOptions o = with_roundoff_floor(ols, acc);
    for (auto& a : acc) m.fits.push_back(a.solve(o, {"u", "u_xx", "u*u_x"}));
    return m;
}

Rollout euler_predict(const EulerModel& model, const SpatialFunction& u0) {
    const auto& g = model.grid;
    if (u0.size() != static_cast<std::size_t>(g.nx)) throw ConfigError("initial condition does not match the model grid");
    Rollout r;
    r.grid = g;
    r.values.assign(u0.values().begin(), u0.values().end());
    double scale = 0.0;
    for (double v : u0.values()) scale = std::max(scale, std::abs(v));
    const double limit = 1e12 * std::max(1.0, scale);
    for (int k = 0; k < g.N; ++k) {
        const Eigen::MatrixXd F = euler_row_features(r.row(k), g.dx());
        std::vector<double> next(static_cast<std::size_t>(g.nx));
        bool bad = false;
        for (int i = 0; i < g.nx; ++i) {
            const auto& fit = model.fits[static_cast<std::size_t>(i)];
            double v = fit.intercept;
            for (int j = 0; j < 3; ++j) v += fit.coefficients[static_cast<std::size_t>(j)] * F(i, j);
            next[static_cast<std::size_t>(i)] = v;
            if (!std::isfinite(v) || std::abs(v) > limit) bad = true;
        }
        if (bad) {
            r.diverged_at = k + 1;
            return r;
        }
        r.values.insert(r.values.end(), next.begin(), next.end());
        r.steps_completed = k + 1;
    }
    return r;
}

PdeFindFit pdefind_fit(const std::vector<GridFunction>& train, bool intercept) {
    require_same_grid(train, "PDE-FIND");
    const auto& g = train.front().grid();
    LeastSquaresAccumulator acc(2, intercept);
    const auto nx = static_cast<std::size_t>(g.nx);
    std::vector<double> d1(nx), d2(nx);
    for (const auto& u : train) {
        Eigen::MatrixXd X(static_cast<Eigen::Index>(nx) * g.N, 2);
        Eigen::VectorXd y(static_cast<Eigen::Index>(nx) * g.N);
        Eigen::Index r = 0;
        for (int k = 0; k < g.N; ++k) {
            auto cur = u.row(k);
            auto nxt = u.row(k + 1);
            central_d1(cur, d1, g.dx());
            central_d2(cur, d2, g.dx());
            for (std::size_t i = 0; i < nx; ++i, ++r) {
                X(r, 0) = d2[i];
                X(r, 1) = cur[i] * d1[i];
                y(r) = (nxt[i] - cur[i]) / g.dt();
            }
        }
        acc.add(X, y);
    }
    OlsOptions opts;
    opts.intercept = intercept;
    const LinearFit fit = acc.solve(opts, {"u_xx", "u*u_x"});
    PdeFindFit out;
    out.a = fit.coefficients[0];
    out.b = fit.coefficients[1];
    out.intercept = fit.intercept;
    out.has_intercept = intercept;
    out.rows = acc.rows();
    return out;
}

GridFunction pdefind_simulate(const PdeFindFit& fit, const SpatialFunction& u0, const SpaceTimeGrid& observed,
                              int substeps) {
    if (substeps < 1) throw ConfigError("PDE-FIND simulation needs at least one substep");
    if (u0.size() != static_cast<std::size_t>(observed.nx)) throw ConfigError("initial condition does not match the grid");
    SpaceTimeGrid fine = observed;
    fine.N = observed.N * substeps;
    const double dt = fine.dt();
    const double r = fit.a * dt / (fine.dx() * fine.dx());
    if (1.0 + 4.0 * r <= 0.0) throw NumericalError("PDE-FIND diffusion coefficient makes the implicit step singular");
    PeriodicTridiagonal implicit(fine.nx, 1.0 + 2.0 * r, -r);
    std::vector<double> out(observed.size());
    std::vector<double> cur(u0.values().begin(), u0.values().end()), d1(cur.size());
    std::copy(cur.begin(), cur.end(), out.begin());
    for (int k = 0; k < fine.N; ++k) {
        central_d1(cur, d1, fine.dx());
        for (std::size_t i = 0; i < cur.size(); ++i) cur[i] += dt * (fit.b * cur[i] * d1[i] + fit.intercept);
        implicit.solve(cur);
        for (double v : cur)
            if (!std::isfinite(v)) throw NumericalError("PDE-FIND simulation blew up", k + 1);
        if ((k + 1) % substeps == 0)
            std::copy(cur.begin(), cur.end(), out.begin() + static_cast<std::ptrdiff_t>((k + 1) / substeps) * observed.nx);
    }
    return GridFunction(observed, std::move(out));
}

GridFunction add_noise(const GridFunction& u, double sd, std::uint64_t seed, NoiseMode mode) {
    if (sd < 0.0) throw ConfigError("noise standard deviation must be non-negative");
    GridFunction out = u;
    if (sd == 0.0) return out;
    const double amp = std::sqrt(mean_abs_norm(u));
    Philox rng(seed, kObservationNoiseStream);
    auto vals = mode == NoiseMode::AllPoints ? out.values() : out.row(0);
    for (double& v : vals) v += sd * rng.next_normal() * amp;
    return out;
}

double estimate_viscosity(const std::vector<GridFunction>& train) {
    require_same_grid(train, "viscosity estimate");
    return estimate_viscosity(train, train.front().grid().dt());
}

double estimate_viscosity(const std::vector<GridFunction>& train, double delta) {
    require_same_grid(train, "viscosity estimate");
    if (!(delta > 0.0)) throw ConfigError("viscosity estimate needs a positive time step");
    const auto& g = train.front().grid();
    if (g.nt() < 2) throw ConfigError("viscosity estimate needs at least two time slices");
    const auto nx = static_cast<std::size_t>(g.nx);
    Eigen::MatrixXd X(static_cast<Eigen::Index>(nx * train.size()), 1);
    Eigen::VectorXd y(X.rows());
    std::vector<double> d2(nx);
    Eigen::Index r = 0;
    for (const auto& u : train) {
        central_d2(u.row(0), d2, g.dx());
        for (std::size_t i = 0; i < nx; ++i, ++r) {
            X(r, 0) = d2[i];
            y(r) = (u(1, static_cast<int>(i)) - u(0, static_cast<int>(i))) / delta;
        }
    }
    const double mean = X.col(0).mean();
    if ((X.col(0).array() - mean).abs().maxCoeff() <= 1e-14 * std::max(1.0, std::abs(mean)))
        throw ConfigError("viscosity estimate: the second derivative does not vary (degenerate regressor)");
    return ols_fit(X, y).coefficients[0];
}

// ---------------------------------------------------------------- reports

void PredictionReport::recompute_aggregates() {
    aggregates.clear();
    std::vector<std::string> order;
    for (const auto& c : cases)
        if (std::find(order.begin(), order.end(), c.variant) == order.end()) order.push_back(c.variant);
    for (const auto& v : order) {
        Aggregate a;
        a.variant = v;
        double sum = 0.0, slope_sum = 0.0;
        std::size_t slope_n = 0;
        a.min = std::numeric_limits<double>::infinity();
        a.max = -std::numeric_limits<double>::infinity();
        std::map<int, std::pair<double, std::size_t>> per_repeat;
        for (const auto& c : cases) {
            if (c.variant != v) continue;
            ++a.count;
            sum += c.rel_l2;
            a.min = std::min(a.min, c.rel_l2);
            a.max = std::max(a.max, c.rel_l2);
            auto& pr = per_repeat[c.repeat];
            pr.first += c.rel_l2;
            ++pr.second;
            if (std::isfinite(c.slope)) {
                slope_sum += c.slope;
                ++slope_n;
            }
        }
        a.mean = sum / static_cast<double>(a.count);
        a.repeat_mean_min = std::numeric_limits<double>::infinity();
        a.repeat_mean_max = -std::numeric_limits<double>::infinity();
        for (const auto& [r, pr] : per_repeat) {
            const double m = pr.first / static_cast<double>(pr.second);
            a.repeat_mean_min = std::min(a.repeat_mean_min, m);
            a.repeat_mean_max = std::max(a.repeat_mean_max, m);
        }
        if (slope_n) a.mean_slope = slope_sum / static_cast<double>(slope_n);
        aggregates.push_back(a);
    }
}

const Aggregate* PredictionReport::find(const std::string& variant) const {
    for (const auto& a : aggregates)
        if (a.variant == variant) return &a;
    return nullptr;
}

namespace {

nlohmann::json num(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

std::string PredictionReport::to_json() const {
    nlohmann::json j;
    j["experiment"] = experiment;
    auto cs = nlohmann::json::array();
    for (const auto& c : cases)
        cs.push_back({{"variant", c.variant}, {"repeat", c.repeat}, {"index", c.index}, {"rel_l2", num(c.rel_l2)},
                      {"slope", num(c.slope)}, {"note", c.note}});
    j["cases"] = cs;
    auto ag = nlohmann::json::array();
    for (const auto& a : aggregates)
        ag.push_back({{"variant", a.variant},
                      {"count", a.count},
                      {"mean", num(a.mean)},
                      {"min", num(a.min)},
                      {"max", num(a.max)},
                      {"repeat_mean_min", num(a.repeat_mean_min)},
                      {"repeat_mean_max", num(a.repeat_mean_max)},
                      {"mean_slope", num(a.mean_slope)}});
    j["aggregates"] = ag;
    auto sj = nlohmann::json::object();
    for (const auto& [k, v] : series) {
        auto arr = nlohmann::json::array();
        for (double x : v) arr.push_back(num(x));
        sj[k] = arr;
    }
    j["series"] = sj;
    j["failures"] = failures;
    return j.dump(2);
}

void PredictionReport::write_csv(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path + " for writing");
    os << "variant,repeat,index,rel_l2,slope,note\n" << std::setprecision(10);
    for (const auto& c : cases)
        os << c.variant << ',' << c.repeat << ',' << c.index << ',' << c.rel_l2 << ',' << c.slope << ',' << c.note << '\n';
    if (!os) throw IoError("write failed for " + path);
}

}  // namespace rsf
