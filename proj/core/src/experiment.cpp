#include "rsf/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rsf/dataset.hpp"
#include "rsf/error.hpp"
#include "rsf/log.hpp"
#include "rsf/parallel.hpp"
#include "rsf/random.hpp"
#include "rsf/solvers.hpp"
#include "rsf/svg.hpp"

namespace rsf {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kExperiments{"parabolic-mult", "parabolic-add", "wave", "burgers", "signature-check"};
const std::vector<std::string> kBurgersVariants{"alg4",  "alg4-noisy", "alg4-nu-estimated",
                                                "euler", "pdefind",    "pdefind-noisy"};

constexpr std::uint64_t kTrainNoiseSalt = 0x6e6f6973652d7472ULL;
constexpr std::uint64_t kTestNoiseSalt = 0x6e6f6973652d7465ULL;
constexpr std::uint64_t kPathStream = 5;

bool is_alg1(const std::string& e) { return e == "parabolic-mult" || e == "parabolic-add" || e == "wave"; }

int scaled(int count, double scale) { return static_cast<int>(std::lround(count * scale)); }

std::string join_j(const std::vector<std::string>& J) {
    if (J.empty()) return "none";
    std::string s;
    for (const auto& j : J) s += (s.empty() ? "" : "+") + j;
    return s;
}

std::string num(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

std::string slug(const std::string& s) {
    std::string out;
    for (char c : s) out += std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' ? c : '_';
    return out;
}

json grid_json(const SpaceTimeGrid& g) {
    return {{"t0", g.t0}, {"T", g.T},   {"N", g.N},       {"x_min", g.x_min},
            {"x_max", g.x_max}, {"nx", g.nx}, {"d", g.d}, {"periodic", g.periodic}};
}

SpaceTimeGrid grid_from(const json& j, SpaceTimeGrid g) {
    g.t0 = j.value("t0", g.t0);
    g.T = j.value("T", g.T);
    g.N = j.value("N", g.N);
    g.x_min = j.value("x_min", g.x_min);
    g.x_max = j.value("x_max", g.x_max);
    g.nx = j.value("nx", g.nx);
    g.d = j.value("d", g.d);
    g.periodic = j.value("periodic", g.periodic);
    return g;
}

}  // namespace

// ---------------------------------------------------------------- config

void ExperimentConfig::validate() const {
    if (std::find(kExperiments.begin(), kExperiments.end(), experiment) == kExperiments.end())
        throw ConfigError("unknown experiment '" + experiment + "'");
    if (!(scale > 0.0)) throw ConfigError("scale must be positive");
    if (repeats < 1) throw ConfigError("repeats must be at least 1");
    if (workers < 0) throw ConfigError("workers must be non-negative");
    features.alpha.validate();
    features.degree.validate();
    if (features.n < 0) throw ConfigError("height must be non-negative");
    if (experiment == "signature-check") {
        if (paths < 1 || path_pieces < 1 || steps_per_piece < 1) throw ConfigError("signature check needs paths");
        for (int d : path_dims)
            if (d < 1) throw ConfigError("path dimension must be positive");
        return;
    }
    grid.validate();
    if (grid.d != 1) throw ConfigError("experiments run on one-dimensional periodic grids");
    if (!(nu > 0.0)) throw ConfigError("viscosity must be positive");
    const int s = scaled_samples(), tr = scaled_train(), te = scaled_test();
    if (tr < 1 || te < 1) throw ConfigError("scaled split leaves an empty training or test set");
    if (tr + te > s) throw ConfigError("train + test exceeds the sample count");
    if (is_alg1(experiment)) {
        if (points.empty()) throw ConfigError("Algorithm 1 experiments need prediction points");
        for (const auto& [t, x] : points) grid_point(grid, t, x);
        for (int h : heights)
            if (h < 1 || h > features.n) throw ConfigError("reported heights must lie in 1..n");
        if (experiment == "wave") check_cfl(grid);
    }
    if (experiment == "burgers") {
        fine_grid.validate();
        if (features.alpha.p != 0 || features.alpha.l != 0) throw ConfigError("burgers needs p = l = 0");
        if (features.J != std::vector<std::string>{"c"}) throw ConfigError("burgers needs J = {c}");
        if (lambdas.empty()) throw ConfigError("burgers needs at least one lambda");
        if (substeps < 1 || pdefind_substeps < 1) throw ConfigError("substep counts must be positive");
        if (noise_sd < 0.0) throw ConfigError("noise level must be non-negative");
        for (const auto& v : variants)
            if (std::find(kBurgersVariants.begin(), kBurgersVariants.end(), v) == kBurgersVariants.end())
                throw ConfigError("unknown burgers variant '" + v + "'");
        if (euler_horizon < 1 || euler_horizon > grid.N) throw ConfigError("euler horizon must lie in 1..N");
    }
}

int ExperimentConfig::scaled_samples() const { return scaled(samples, scale); }
int ExperimentConfig::scaled_train() const { return scaled(train, scale); }
int ExperimentConfig::scaled_test() const { return std::min(scaled(test, scale), scaled_samples() - scaled_train()); }
int ExperimentConfig::worker_count() const { return workers > 0 ? workers : default_workers(); }

std::vector<std::string> preset_names() { return kExperiments; }

ExperimentConfig preset(const std::string& name) {
    ExperimentConfig c;
    c.experiment = name;
    if (name == "parabolic-mult") {
        c.features = {4, {3, 2, 1, 0}, {}, {2.0, -1.5, {{"c", 0.0}}, DegreeRule::Sum}, 5.0};
        c.heights = {1, 2, 3, 4};
        c.points = {{0.05, 0.5}, {0.5, 0.5}, {1.0, 0.5}, {1.0, 0.95}};
    } else if (name == "parabolic-add") {
        c.features = {5, {3, 1, 1, 0}, {}, {2.0, -1.5, {{"c", 0.0}}, DegreeRule::Sum}, 7.5};
        c.heights = {1, 2, 3, 4, 5};
        c.points = {{0.05, 0.5}, {0.5, 0.5}, {1.0, 0.5}};
    } else if (name == "wave") {
        // The initialising symbols are flows of u0 and v0, so their degree is beta + deg(u0) = 1.5 - 0.5.
        c.features = {4, {2, 2, 1, 0}, {"c", "s"}, {1.5, -1.5, {{"c", 1.0}, {"s", 1.0}}, DegreeRule::Sum}, 1.5};
        c.j_variants = {{"c", "s"}, {"c"}, {}};
        c.heights = {1, 2, 3, 4};
        c.points = {{1.0, 0.5}};
    } else if (name == "burgers") {
        c.grid = {0.0, 10.0, 200, -8.0, 8.0, 512, 1, true};
        c.nu = 0.1;
        c.features = {3, {2, 0, 0, 1}, {"c"}, {2.0, -1.5, {{"c", 0.5}}, DegreeRule::Sum}, 2.5};
        c.samples = 120;
        c.train = 100;
        c.test = 20;
        c.variants = kBurgersVariants;
    } else if (name == "signature-check") {
        c.grid = {0.0, 1.0, 1, 0.0, 1.0, 1, 0, false};
        c.features = {3, {0, 2, 1, 0}, {}, {}, std::nullopt};
        c.samples = c.train = c.test = 0;
        c.repeats = 1;
    } else {
        throw ConfigError("unknown preset '" + name + "' (known: parabolic-mult, parabolic-add, wave, burgers, "
                          "signature-check)");
    }
    return c;
}

std::string to_json(const ExperimentConfig& c) {
    json deg_init = json::object();
    for (const auto& [k, v] : c.features.degree.deg_initial) deg_init[k] = v;
    json pts = json::array();
    for (const auto& [t, x] : c.points) pts.push_back({t, x});
    json j{
        {"experiment", c.experiment},
        {"grid", grid_json(c.grid)},
        {"nu", c.nu},
        {"features",
         {{"n", c.features.n},
          {"alpha", {c.features.alpha.m, c.features.alpha.l, c.features.alpha.p, c.features.alpha.q}},
          {"J", c.features.J},
          {"degree",
           {{"beta", c.features.degree.beta},
            {"deg_xi", c.features.degree.deg_xi},
            {"deg_initial", deg_init},
            {"rule", c.features.degree.rule == DegreeRule::Sum ? "sum" : "product"}}},
          {"gamma", c.features.gamma ? json(*c.features.gamma) : json(nullptr)}}},
        {"j_variants", c.j_variants},
        {"heights", c.heights},
        {"points", pts},
        {"samples", c.samples},
        {"train", c.train},
        {"test", c.test},
        {"repeats", c.repeats},
        {"scale", c.scale},
        {"seed", c.seed},
        {"workers", c.workers},
        {"ridge", c.ridge},
        {"intercept", c.intercept},
        {"fine_grid", grid_json(c.fine_grid)},
        {"lambdas", c.lambdas},
        {"modes", c.modes},
        {"substeps", c.substeps},
        {"noise_sd", c.noise_sd},
        {"variants", c.variants},
        {"pdefind_substeps", c.pdefind_substeps},
        {"pdefind_intercept", c.pdefind_intercept},
        {"euler_horizon", c.euler_horizon},
        {"path_dims", c.path_dims},
        {"paths", c.paths},
        {"path_pieces", c.path_pieces},
        {"steps_per_piece", c.steps_per_piece},
    };
    return j.dump(2);
}

ExperimentConfig config_from_json(const std::string& text) {
    try {
        const json j = json::parse(text);
        ExperimentConfig c = preset(j.at("experiment").get<std::string>());
        static const std::set<std::string> known{
            "experiment", "grid",    "nu",       "features",  "j_variants", "heights",          "points",
            "samples",    "train",   "test",     "repeats",   "scale",      "seed",             "workers",
            "ridge",      "intercept", "fine_grid", "lambdas", "modes",      "substeps",         "noise_sd",
            "variants",   "pdefind_substeps", "pdefind_intercept", "euler_horizon", "path_dims", "paths",
            "path_pieces", "steps_per_piece"};
        for (const auto& [k, v] : j.items())
            if (!known.count(k)) throw ConfigError("unknown config key '" + k + "'");
        if (j.contains("grid")) c.grid = grid_from(j["grid"], c.grid);
        c.nu = j.value("nu", c.nu);
        if (j.contains("features")) {
            const auto& f = j["features"];
            c.features.n = f.value("n", c.features.n);
            if (f.contains("alpha")) {
                const auto a = f["alpha"].get<std::vector<int>>();
                if (a.size() != 4) throw ConfigError("alpha needs four entries [m, l, p, q]");
                c.features.alpha = {a[0], a[1], a[2], a[3]};
            }
            if (f.contains("J")) c.features.J = f["J"].get<std::vector<std::string>>();
            if (f.contains("degree")) {
                const auto& d = f["degree"];
                c.features.degree.beta = d.value("beta", c.features.degree.beta);
                c.features.degree.deg_xi = d.value("deg_xi", c.features.degree.deg_xi);
                if (d.contains("deg_initial"))
                    c.features.degree.deg_initial = d["deg_initial"].get<std::map<std::string, double>>();
                if (d.contains("rule")) {
                    const auto r = d["rule"].get<std::string>();
                    if (r == "sum") c.features.degree.rule = DegreeRule::Sum;
                    else if (r == "product") c.features.degree.rule = DegreeRule::Product;
                    else throw ConfigError("degree rule must be 'sum' or 'product'");
                }
            }
            if (f.contains("gamma"))
                c.features.gamma = f["gamma"].is_null() ? std::nullopt : std::optional<double>(f["gamma"].get<double>());
        }
        if (j.contains("j_variants")) c.j_variants = j["j_variants"].get<std::vector<std::vector<std::string>>>();
        if (j.contains("heights")) c.heights = j["heights"].get<std::vector<int>>();
        if (j.contains("points")) {
            c.points.clear();
            for (const auto& p : j["points"]) {
                const auto v = p.get<std::vector<double>>();
                if (v.size() != 2) throw ConfigError("points are [t, x] pairs");
                c.points.emplace_back(v[0], v[1]);
            }
        }
        c.samples = j.value("samples", c.samples);
        c.train = j.value("train", c.train);
        c.test = j.value("test", c.test);
        c.repeats = j.value("repeats", c.repeats);
        c.scale = j.value("scale", c.scale);
        c.seed = j.value("seed", c.seed);
        c.workers = j.value("workers", c.workers);
        c.ridge = j.value("ridge", c.ridge);
        c.intercept = j.value("intercept", c.intercept);
        if (j.contains("fine_grid")) c.fine_grid = grid_from(j["fine_grid"], c.fine_grid);
        if (j.contains("lambdas")) c.lambdas = j["lambdas"].get<std::vector<double>>();
        c.modes = j.value("modes", c.modes);
        c.substeps = j.value("substeps", c.substeps);
        c.noise_sd = j.value("noise_sd", c.noise_sd);
        if (j.contains("variants")) c.variants = j["variants"].get<std::vector<std::string>>();
        c.pdefind_substeps = j.value("pdefind_substeps", c.pdefind_substeps);
        c.pdefind_intercept = j.value("pdefind_intercept", c.pdefind_intercept);
        c.euler_horizon = j.value("euler_horizon", c.euler_horizon);
        if (j.contains("path_dims")) c.path_dims = j["path_dims"].get<std::vector<int>>();
        c.paths = j.value("paths", c.paths);
        c.path_pieces = j.value("path_pieces", c.path_pieces);
        c.steps_per_piece = j.value("steps_per_piece", c.steps_per_piece);
        c.validate();
        return c;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("invalid experiment config: ") + e.what());
    }
}

ExperimentConfig load_config(const fs::path& path) {
    std::string text;
    try {
        text = dataset::read_text(path);
    } catch (const IoError& e) {
        throw ConfigError(e.what());
    }
    return config_from_json(text);
}

std::pair<int, int> grid_point(const SpaceTimeGrid& g, double t, double x) {
    const double kf = (t - g.t0) / g.dt();
    const double xf = (x - g.x_min) / g.dx();
    const long k = std::lround(kf), i = std::lround(xf);
    if (std::abs(kf - static_cast<double>(k)) > 1e-6 || std::abs(xf - static_cast<double>(i)) > 1e-6 || k < 0 ||
        k > g.N || i < 0 || i >= g.nx)
        throw ConfigError("point (" + num(t) + ", " + num(x) + ") is not on the observation grid");
    return {static_cast<int>(k), static_cast<int>(i)};
}

FeatureSet experiment_features(const ExperimentConfig& cfg, const std::vector<std::string>& J) {
    EnumerateOptions opts;
    opts.dim = 1;
    if (cfg.features.gamma) {
        opts.degree = cfg.features.degree;
        opts.gamma = cfg.features.gamma;
    }
    return enumerate(cfg.features.n, cfg.features.alpha, J, opts);
}

// ---------------------------------------------------------------- data

GridFunction experiment_noise(const ExperimentConfig& cfg, int index) {
    return sample_white_noise({derive_seed(cfg.seed, static_cast<std::uint64_t>(index)), cfg.grid});
}

namespace {

SpatialFunction parabolic_u0(const SpaceTimeGrid& g) {
    auto xs = g.xs();
    for (double& x : xs) x = x * (1.0 - x);
    return SpatialFunction(std::move(xs));
}

SpatialFunction wave_u0(const SpaceTimeGrid& g) {
    auto xs = g.xs();
    for (double& x : xs) x = std::sin(2.0 * std::numbers::pi * x);
    return SpatialFunction(std::move(xs));
}

}  // namespace

GridFunction experiment_solution(const ExperimentConfig& cfg, const GridFunction& xi) {
    if (cfg.experiment == "parabolic-mult")
        return solve_parabolic(Polynomial{{0.0, 3.0, 0.0, -1.0}}, Polynomial{{0.0, 1.0}}, parabolic_u0(cfg.grid), xi,
                               cfg.nu);
    if (cfg.experiment == "parabolic-add")
        return solve_parabolic(Polynomial{{0.0, 3.0, 0.0, -1.0}}, Polynomial{{1.0}}, parabolic_u0(cfg.grid), xi, cfg.nu);
    if (cfg.experiment == "wave")
        return solve_wave(Nonlinearity::wave_default(), wave_u0(cfg.grid), parabolic_u0(cfg.grid), xi);
    throw ConfigError("experiment '" + cfg.experiment + "' has no forced solution");
}

ModelInput experiment_input(const ExperimentConfig& cfg, const std::vector<std::string>& J, GridFunction xi) {
    ModelInput in;
    in.xi.push_back(std::move(xi));
    const bool wave = cfg.experiment == "wave";
    for (const auto& name : J) {
        if (name == "c") {
            in.u_init.emplace("c", wave ? wave_Ic(wave_u0(cfg.grid), cfg.grid)
                                        : heat_Ic(parabolic_u0(cfg.grid), cfg.grid, cfg.nu));
        } else if (name == "s" && wave) {
            in.u_init.emplace("s", wave_Is(parabolic_u0(cfg.grid), cfg.grid));
        } else {
            throw ConfigError("no input is defined for initialising symbol '" + name + "' in " + cfg.experiment);
        }
    }
    return in;
}

double burgers_lambda(const ExperimentConfig& cfg, int index) {
    return cfg.lambdas[static_cast<std::size_t>(index) % cfg.lambdas.size()];
}

SpatialFunction burgers_initial(const ExperimentConfig& cfg, int index) {
    const auto xs = cfg.fine_grid.xs();
    return sample_burgers_ic({derive_seed(cfg.seed, static_cast<std::uint64_t>(index)), burgers_lambda(cfg, index), cfg.modes},
                             xs);
}

GridFunction burgers_sample(const ExperimentConfig& cfg, int index) {
    BurgersConfig bc;
    bc.nu = cfg.nu;
    bc.fine = cfg.fine_grid;
    bc.coarse = cfg.grid;
    try {
        return solve_burgers(burgers_initial(cfg, index), bc);
    } catch (const NumericalError& e) {
        throw e.annotated("burgers sample " + std::to_string(index));
    }
}

SampleStore::SampleStore(ExperimentConfig cfg, std::optional<fs::path> dir) : cfg_(std::move(cfg)), dir_(std::move(dir)) {
    cfg_.validate();
}

GridFunction SampleStore::solution(int index) const {
    if (dir_) return dataset::read_sample(*dir_, index);
    if (cfg_.experiment == "burgers") return burgers_sample(cfg_, index);
    try {
        return experiment_solution(cfg_, experiment_noise(cfg_, index));
    } catch (const NumericalError& e) {
        throw e.annotated("sample " + std::to_string(index));
    }
}

// ---------------------------------------------------------------- generate

void generate_dataset(const ExperimentConfig& cfg, const fs::path& out) {
    cfg.validate();
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw IoError("cannot create " + out.string() + ": " + ec.message());

    json meta;
    meta["format"] = "rsf-dataset/1";
    meta["config"] = json::parse(to_json(cfg));
    if (cfg.experiment == "signature-check") {
        meta["samples"] = 0;
        dataset::write_text(dataset::meta_path(out), meta.dump(2) + "\n");
        dataset::write_splits(out, {});
        return;
    }
    const int n = cfg.scaled_samples();
    const auto t0 = std::chrono::steady_clock::now();
    const SampleStore solver(cfg);
    std::atomic<int> done{0};
    parallel_for(static_cast<std::size_t>(n), cfg.worker_count(), [&](std::size_t i) {
        dataset::write_sample(out, static_cast<int>(i), solver.solution(static_cast<int>(i)));
        const int d = ++done;
        if (d % 50 == 0 || d == n) log::info("generated " + std::to_string(d) + "/" + std::to_string(n) + " samples");
    });
    json seeds = json::array();
    json lambdas = json::array();
    for (int i = 0; i < n; ++i) {
        seeds.push_back(derive_seed(cfg.seed, static_cast<std::uint64_t>(i)));
        if (cfg.experiment == "burgers") lambdas.push_back(burgers_lambda(cfg, i));
    }
    meta["samples"] = n;
    meta["grid"] = grid_json(cfg.grid);
    meta["sample_seeds"] = seeds;
    if (cfg.experiment == "burgers") meta["lambdas"] = lambdas;
    dataset::write_text(dataset::meta_path(out), meta.dump(2) + "\n");

    std::vector<Split> splits;
    for (int r = 0; r < cfg.repeats; ++r)
        splits.push_back(repeat_split(n, cfg.scaled_train(), cfg.scaled_test(), cfg.seed, r));
    dataset::write_splits(out, splits);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    log::info("dataset written to " + out.string() + " in " + num(std::round(secs * 10) / 10) + " s");
}

ExperimentConfig dataset_config(const fs::path& dir) {
    try {
        const json meta = json::parse(dataset::read_text(dataset::meta_path(dir)));
        return config_from_json(meta.at("config").dump());
    } catch (const json::exception& e) {
        throw IoError("malformed " + dataset::meta_path(dir).string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------- run: Algorithm 1 experiments

namespace {

struct Scatter {
    std::string name;
    std::vector<double> truth;
    std::vector<double> pred;
};

struct Artifacts {
    std::vector<Scatter> scatters;
    std::vector<std::pair<std::string, GridFunction>> fields;
    std::vector<std::pair<std::string, std::string>> tables;  // file name, CSV text
};

std::vector<Split> splits_for(const SampleStore& store) {
    const auto& cfg = store.config();
    std::vector<Split> out;
    for (int r = 0; r < cfg.repeats; ++r)
        out.push_back(repeat_split(cfg.scaled_samples(), cfg.scaled_train(), cfg.scaled_test(), cfg.seed, r));
    return out;
}

PredictionReport run_alg1(const SampleStore& store, Artifacts& art) {
    const auto& cfg = store.config();
    PredictionReport rep;
    rep.experiment = cfg.experiment;
    const int n = cfg.scaled_samples();
    const int workers = cfg.worker_count();
    const auto jvars = cfg.j_variants.empty() ? std::vector<std::vector<std::string>>{cfg.features.J} : cfg.j_variants;
    const auto heights = cfg.heights.empty() ? std::vector<int>{cfg.features.n} : cfg.heights;

    std::vector<std::pair<int, int>> pts;
    for (const auto& [t, x] : cfg.points) pts.push_back(grid_point(cfg.grid, t, x));

    std::vector<FeatureSet> sets;
    for (const auto& J : jvars) {
        sets.push_back(experiment_features(cfg, J));
        log::info("J=" + join_j(J) + ": " + std::to_string(sets.back().size()) + " features");
    }
    const OperatorBundle ops = cfg.experiment == "wave" ? OperatorBundle::wave(cfg.grid) : OperatorBundle::heat(cfg.grid, cfg.nu);

    // rows[v][p] is samples x features; targets[p] the observed u at point p.
    std::vector<std::vector<Eigen::MatrixXd>> rows(sets.size());
    for (std::size_t v = 0; v < sets.size(); ++v)
        rows[v].assign(pts.size(), Eigen::MatrixXd(n, static_cast<Eigen::Index>(sets[v].size())));
    std::vector<Eigen::VectorXd> targets(pts.size(), Eigen::VectorXd(n));
    std::vector<ModelInput> base_inputs;
    for (const auto& J : jvars) base_inputs.push_back(experiment_input(cfg, J, GridFunction(cfg.grid)));

    const auto t0 = std::chrono::steady_clock::now();
    std::atomic<int> done{0};
    parallel_for(static_cast<std::size_t>(n), workers, [&](std::size_t s) {
        const int idx = static_cast<int>(s);
        GridFunction xi = experiment_noise(cfg, idx);
        GridFunction u = store.solution(idx);
        for (std::size_t p = 0; p < pts.size(); ++p) targets[p](idx) = u(pts[p].first, pts[p].second);
        for (std::size_t v = 0; v < sets.size(); ++v) {
            ModelInput in = base_inputs[v];
            in.xi[0] = xi;
            ModelVector mv;
            try {
                mv = evaluate(sets[v], in, ops);
            } catch (const NumericalError& e) {
                throw e.annotated("sample " + std::to_string(idx));
            }
            for (std::size_t p = 0; p < pts.size(); ++p) {
                const auto r = evaluate_at(mv, pts[p].first, pts[p].second);
                for (std::size_t j = 0; j < r.size(); ++j) rows[v][p](idx, static_cast<Eigen::Index>(j)) = r[j];
            }
        }
        const int d = ++done;
        if (d % 100 == 0 || d == n) log::info("features for " + std::to_string(d) + "/" + std::to_string(n) + " samples");
    });
    log::debug("feature extraction took " +
               num(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()) + " s");

    const auto splits = splits_for(store);
    OlsOptions ols;
    ols.intercept = cfg.intercept;
    ols.ridge = cfg.ridge;
    for (std::size_t v = 0; v < sets.size(); ++v) {
        for (int h : heights) {
            std::vector<Eigen::Index> cols;
            std::vector<std::string> keys;
            for (std::size_t j = 0; j < sets[v].size(); ++j)
                if (sets[v].symbols[j].height() <= h) {
                    cols.push_back(static_cast<Eigen::Index>(j));
                    keys.push_back(sets[v].symbols[j].key());
                }
            const double ratio = static_cast<double>(cfg.scaled_train()) / std::max<std::size_t>(1, cols.size());
            if (ratio < 10.0)
                log::warn("J=" + join_j(jvars[v]) + " h=" + std::to_string(h) + ": " + num(ratio) +
                          " training cases per feature (" + std::to_string(cols.size()) + " features), below 10");
            for (std::size_t p = 0; p < pts.size(); ++p) {
                const std::string name = "J=" + join_j(jvars[v]) + " h=" + std::to_string(h) + " t=" +
                                         num(cfg.points[p].first) + " x=" + num(cfg.points[p].second);
                for (int r = 0; r < cfg.repeats; ++r) {
                    const auto& sp = splits[static_cast<std::size_t>(r)];
                    try {
                        Eigen::MatrixXd Xtr(static_cast<Eigen::Index>(sp.train.size()), static_cast<Eigen::Index>(cols.size()));
                        Eigen::VectorXd ytr(static_cast<Eigen::Index>(sp.train.size()));
                        for (std::size_t a = 0; a < sp.train.size(); ++a) {
                            for (std::size_t c = 0; c < cols.size(); ++c)
                                Xtr(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(c)) = rows[v][p](sp.train[a], cols[c]);
                            ytr(static_cast<Eigen::Index>(a)) = targets[p](sp.train[a]);
                        }
                        const LinearFit fit = ols_fit(Xtr, ytr, ols, keys);
                        std::vector<double> truth, pred;
                        std::vector<double> row(cols.size());
                        for (int t : sp.test) {
                            for (std::size_t c = 0; c < cols.size(); ++c) row[c] = rows[v][p](t, cols[c]);
                            pred.push_back(predict(fit, row));
                            truth.push_back(targets[p](t));
                        }
                        CaseResult cr;
                        cr.variant = name;
                        cr.repeat = r;
                        cr.index = -1;
                        cr.rel_l2 = rel_l2(pred, truth);
                        cr.slope = fit_slope(truth, pred);
                        cr.note = std::to_string(cols.size()) + " features";
                        rep.cases.push_back(cr);
                        if (r == 0) art.scatters.push_back({name, truth, pred});
                    } catch (const Error& e) {
                        rep.failures.push_back(name + " repeat " + std::to_string(r) + ": " + e.what());
                    }
                }
            }
        }
    }
    rep.recompute_aggregates();
    return rep;
}

// ---------------------------------------------------------------- run: Burgers

double max_prefix(const std::vector<double>& e, int horizon) {
    double m = 0.0;
    for (int k = 1; k <= horizon && k < static_cast<int>(e.size()); ++k) m = std::max(m, e[static_cast<std::size_t>(k)]);
    return m;
}

std::vector<double> alg4_slice_errors(const GridFunction& pred, const GridFunction& truth) {
    std::vector<double> e(static_cast<std::size_t>(truth.nt()));
    for (int k = 0; k < truth.nt(); ++k) {
        auto p = pred.row(k);
        auto t = truth.row(k);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < t.size(); ++i) {
            num += (p[i] - t[i]) * (p[i] - t[i]);
            den += t[i] * t[i];
        }
        e[static_cast<std::size_t>(k)] = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
    }
    return e;
}

PredictionReport run_burgers(const SampleStore& store, Artifacts& art) {
    const auto& cfg = store.config();
    PredictionReport rep;
    rep.experiment = cfg.experiment;
    const int n = cfg.scaled_samples();
    const int workers = cfg.worker_count();
    auto has = [&](const std::string& v) { return std::find(cfg.variants.begin(), cfg.variants.end(), v) != cfg.variants.end(); };

    std::vector<GridFunction> clean(static_cast<std::size_t>(n));
    {
        std::atomic<int> done{0};
        parallel_for(static_cast<std::size_t>(n), workers, [&](std::size_t i) {
            clean[i] = store.solution(static_cast<int>(i));
            const int d = ++done;
            if (d % 20 == 0 || d == n) log::info("loaded " + std::to_string(d) + "/" + std::to_string(n) + " solutions");
        });
    }
    const bool noisy = has("alg4-noisy") || has("pdefind-noisy");
    std::vector<GridFunction> noisy_train(noisy ? clean.size() : 0), noisy_test(noisy ? clean.size() : 0);
    if (noisy)
        for (std::size_t i = 0; i < clean.size(); ++i) {
            noisy_train[i] = add_noise(clean[i], cfg.noise_sd, derive_seed(cfg.seed ^ kTrainNoiseSalt, i), NoiseMode::AllPoints);
            noisy_test[i] = add_noise(clean[i], cfg.noise_sd, derive_seed(cfg.seed ^ kTestNoiseSalt, i), NoiseMode::InitialSlice);
        }

    Alg4Config base;
    base.features = experiment_features(cfg, {"c"});
    base.nu = cfg.nu;
    base.substeps = cfg.substeps;
    base.ols.intercept = cfg.intercept;
    base.ols.ridge = cfg.ridge;
    base.workers = workers;
    log::info("Algorithm 4 model: " + std::to_string(base.features.size()) + " features");

    const auto splits = splits_for(store);
    const int H = cfg.euler_horizon;
    for (int r = 0; r < cfg.repeats; ++r) {
        const auto& sp = splits[static_cast<std::size_t>(r)];
        auto pick = [&](const std::vector<GridFunction>& all, const std::vector<int>& idx) {
            std::vector<GridFunction> out;
            for (int i : idx) out.push_back(all[static_cast<std::size_t>(i)]);
            return out;
        };
        const auto train = pick(clean, sp.train);
        const std::size_t nt = sp.test.size();
        auto record = [&](const std::string& variant, std::size_t c, double err, const std::string& note = {}) {
            CaseResult cr;
            cr.variant = variant;
            cr.repeat = r;
            cr.index = sp.test[c];
            cr.rel_l2 = err;
            cr.note = note;
            rep.cases.push_back(cr);
        };
        const std::string rtag = "repeat " + std::to_string(r) + ": ";

        double nu_est = std::numeric_limits<double>::quiet_NaN();
        try {
            nu_est = estimate_viscosity(train);
            rep.series["nu_estimate"].push_back(nu_est);
            log::info(rtag + "estimated viscosity " + num(nu_est));
        } catch (const Error& e) {
            rep.failures.push_back(rtag + "viscosity estimate: " + e.what());
        }

        auto run_alg4 = [&](const std::string& variant, const Alg4Config& c4, const std::vector<GridFunction>& tr,
                            const std::vector<GridFunction>* test_inputs) {
            try {
                const auto t0 = std::chrono::steady_clock::now();
                const Alg4Model model = alg4_train(c4, tr);
                log::info(rtag + variant + " trained on " + std::to_string(model.training_pairs) + " pairs in " +
                          num(std::round(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count())) +
                          " s");
                std::vector<double> err(nt), early(nt);
                std::vector<std::string> notes(nt);
                std::vector<std::optional<GridFunction>> preds(nt);
                parallel_for(nt, workers, [&](std::size_t c) {
                    const auto idx = static_cast<std::size_t>(sp.test[c]);
                    const auto& truth = clean[idx];
                    const SpatialFunction u0 = (test_inputs ? (*test_inputs)[idx] : truth).slice(0);
                    Alg4Config one = c4;
                    one.workers = 1;
                    try {
                        GridFunction pred = alg4_predict(model, one, u0);
                        err[c] = rel_l2(pred, truth);
                        early[c] = max_prefix(alg4_slice_errors(pred, truth), H);
                        if (r == 0 && c == 0) preds[c] = std::move(pred);
                    } catch (const NumericalError& e) {
                        err[c] = early[c] = std::numeric_limits<double>::infinity();
                        notes[c] = e.what();
                    }
                });
                for (std::size_t c = 0; c < nt; ++c) {
                    record(variant, c, err[c], notes[c]);
                    if (variant == "alg4") record("alg4 max t<=" + std::to_string(H), c, early[c]);
                }
                if (r == 0 && nt > 0 && preds[0]) {
                    const auto& truth = clean[static_cast<std::size_t>(sp.test[0])];
                    std::vector<double> diff(truth.values().size());
                    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = std::abs(preds[0]->values()[i] - truth.values()[i]);
                    art.fields.emplace_back(slug(variant) + "_prediction", *preds[0]);
                    art.fields.emplace_back(slug(variant) + "_abs_error", GridFunction(truth.grid(), std::move(diff)));
                    if (variant == "alg4") art.fields.emplace_back("truth", truth);
                }
                return preds.empty() ? std::optional<GridFunction>{} : preds[0];
            } catch (const Error& e) {
                rep.failures.push_back(rtag + variant + ": " + e.what());
                return std::optional<GridFunction>{};
            }
        };

        std::optional<GridFunction> alg4_first;
        if (has("alg4")) alg4_first = run_alg4("alg4", base, train, nullptr);
        if (has("alg4-noisy")) run_alg4("alg4-noisy", base, pick(noisy_train, sp.train), &noisy_test);
        if (has("alg4-nu-estimated")) {
            if (std::isfinite(nu_est) && nu_est > 0.0) {
                Alg4Config c4 = base;
                c4.nu = nu_est;
                run_alg4("alg4-nu-estimated", c4, train, nullptr);
            } else {
                rep.failures.push_back(rtag + "alg4-nu-estimated skipped: no positive viscosity estimate");
            }
        }

        if (has("euler")) {
            try {
                OlsOptions ols;
                ols.intercept = cfg.intercept;
                ols.ridge = cfg.ridge;
                const EulerModel em = euler_train(train, ols);
                std::size_t blown = 0;
                for (std::size_t c = 0; c < nt; ++c) {
                    const auto& truth = clean[static_cast<std::size_t>(sp.test[c])];
                    const Rollout ro = euler_predict(em, truth.slice(0));
                    const auto se = ro.slice_errors(truth);
                    double err = std::numeric_limits<double>::infinity();
                    std::string note;
                    if (ro.diverged_at) {
                        note = "diverged at step " + std::to_string(*ro.diverged_at);
                        ++blown;
                    } else {
                        err = rel_l2(std::span<const double>(ro.values), truth.values());
                    }
                    record("euler", c, err, note);
                    record("euler max t<=" + std::to_string(H), c, max_prefix(se, H), note);
                    if (r == 0 && c == 0) {
                        std::ostringstream os;
                        os.precision(10);
                        const int k = std::min(11, truth.grid().N);
                        os << "x,truth,alg4,euler\n";
                        for (int i = 0; i < truth.nx(); ++i) {
                            os << truth.grid().x(i) << ',' << truth(k, i) << ',';
                            if (alg4_first) os << (*alg4_first)(k, i);
                            os << ',';
                            if (k <= ro.steps_completed) os << ro.row(k)[static_cast<std::size_t>(i)];
                            os << '\n';
                        }
                        art.tables.emplace_back("euler_vs_alg4_t" + std::to_string(k) + ".csv", os.str());
                    }
                }
                log::info(rtag + "euler rollout diverged on " + std::to_string(blown) + "/" + std::to_string(nt) + " cases");
            } catch (const Error& e) {
                rep.failures.push_back(rtag + "euler: " + e.what());
            }
        }

        auto run_pdefind = [&](const std::string& variant, const std::vector<GridFunction>& tr,
                               const std::vector<GridFunction>* test_inputs) {
            try {
                const PdeFindFit fit = pdefind_fit(tr, cfg.pdefind_intercept);
                rep.series[variant + " a"].push_back(fit.a);
                rep.series[variant + " b"].push_back(fit.b);
                log::info(rtag + variant + " (a, b) = (" + num(fit.a) + ", " + num(fit.b) + ")");
                std::vector<double> err(nt);
                std::vector<std::string> notes(nt);
                parallel_for(nt, workers, [&](std::size_t c) {
                    const auto idx = static_cast<std::size_t>(sp.test[c]);
                    const auto& truth = clean[idx];
                    const SpatialFunction u0 = (test_inputs ? (*test_inputs)[idx] : truth).slice(0);
                    try {
                        err[c] = rel_l2(pdefind_simulate(fit, u0, truth.grid(), cfg.pdefind_substeps), truth);
                    } catch (const Error& e) {
                        err[c] = std::numeric_limits<double>::infinity();
                        notes[c] = e.what();
                    }
                });
                for (std::size_t c = 0; c < nt; ++c) record(variant, c, err[c], notes[c]);
            } catch (const Error& e) {
                rep.failures.push_back(rtag + variant + ": " + e.what());
            }
        };
        if (has("pdefind")) run_pdefind("pdefind", train, nullptr);
        if (has("pdefind-noisy")) run_pdefind("pdefind-noisy", pick(noisy_train, sp.train), &noisy_test);
    }
    rep.recompute_aggregates();
    return rep;
}

// ---------------------------------------------------------------- run: signature check

PredictionReport run_signature(const ExperimentConfig& cfg) {
    PredictionReport rep;
    rep.experiment = cfg.experiment;
    for (const auto& r : signature_check(cfg)) {
        CaseResult c;
        c.variant = "signature dim=" + std::to_string(r.dim);
        c.index = r.path;
        c.rel_l2 = r.rel_error;
        rep.cases.push_back(c);
    }
    rep.recompute_aggregates();
    return rep;
}

void write_artifacts(const PredictionReport& rep, const Artifacts& art, const fs::path& out, bool svg_out) {
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw IoError("cannot create " + out.string() + ": " + ec.message());
    dataset::write_text(out / "report.json", rep.to_json() + "\n");
    rep.write_csv((out / "report.csv").string());
    for (const auto& s : art.scatters) {
        std::ostringstream os;
        os.precision(12);
        os << "truth,prediction\n";
        for (std::size_t i = 0; i < s.truth.size(); ++i) os << s.truth[i] << ',' << s.pred[i] << '\n';
        dataset::write_text(out / ("scatter_" + slug(s.name) + ".csv"), os.str());
        if (svg_out) dataset::write_text(out / ("scatter_" + slug(s.name) + ".svg"), svg::scatter(s.truth, s.pred, s.name));
    }
    for (const auto& [name, f] : art.fields) {
        write_binary(f, (out / ("heatmap_" + name + ".bin")).string());
        if (svg_out) dataset::write_text(out / ("heatmap_" + name + ".svg"), svg::heatmap(f, name));
    }
    for (const auto& [name, text] : art.tables) dataset::write_text(out / name, text);
}

}  // namespace

PredictionReport run_experiment(const SampleStore& store, const RunOptions& opts) {
    const auto& cfg = store.config();
    Artifacts art;
    PredictionReport rep;
    if (cfg.experiment == "signature-check") rep = run_signature(cfg);
    else if (cfg.experiment == "burgers") rep = run_burgers(store, art);
    else rep = run_alg1(store, art);
    if (opts.out) write_artifacts(rep, art, *opts.out, opts.svg);
    return rep;
}

// ---------------------------------------------------------------- signature check

std::vector<SignatureCheckResult> signature_check(const ExperimentConfig& cfg, bool inject_fault) {
    std::vector<SignatureCheckResult> out;
    const int level = cfg.features.n;
    for (int K : cfg.path_dims) {
        EnumerateOptions eo;
        eo.dim = 0;
        eo.channels = K;
        const FeatureSet fs = enumerate(level, cfg.features.alpha, {}, eo);
        SpaceTimeGrid g{0.0, 1.0, cfg.path_pieces * cfg.steps_per_piece, 0.0, 1.0, K, 0, false};
        SpaceTimeGrid channel_grid = g;
        channel_grid.nx = 1;
        const OperatorBundle ops = OperatorBundle::time_integral(channel_grid);
        for (int p = 0; p < cfg.paths; ++p) {
            Philox rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(K) * 100000 + static_cast<std::uint64_t>(p)),
                       kPathStream);
            std::vector<double> corners(static_cast<std::size_t>((cfg.path_pieces + 1) * K), 0.0);
            for (int s = 1; s <= cfg.path_pieces; ++s)
                for (int c = 0; c < K; ++c)
                    corners[static_cast<std::size_t>(s * K + c)] = corners[static_cast<std::size_t>((s - 1) * K + c)] + rng.next_normal();
            GridFunction path(g);
            for (int k = 0; k <= g.N; ++k) {
                const int s = std::min(k / cfg.steps_per_piece, cfg.path_pieces - 1);
                const double w = static_cast<double>(k - s * cfg.steps_per_piece) / cfg.steps_per_piece;
                for (int c = 0; c < K; ++c)
                    path(k, c) = (1.0 - w) * corners[static_cast<std::size_t>(s * K + c)] +
                                 w * corners[static_cast<std::size_t>((s + 1) * K + c)];
            }
            auto oracle = signature_oracle(path, level);
            if (inject_fault && p == 0) oracle.begin()->second += 1.0;
            ModelInput in;
            in.xi = path_derivative(path);
            const ModelVector mv = evaluate(fs, in, ops);
            double num2 = 0.0, den2 = 0.0;
            for (const auto& [key, value] : oracle) {
                if (!mv.contains(key)) throw NumericalError("model lacks signature term " + key);
                const double m = mv.at(key)(g.N, 0);
                num2 += (m - value) * (m - value);
                den2 += value * value;
            }
            if (mv.size() != oracle.size())
                throw NumericalError("model has " + std::to_string(mv.size()) + " symbols but the signature has " +
                                     std::to_string(oracle.size()) + " terms");
            out.push_back({K, p, std::sqrt(num2 / den2)});
        }
    }
    return out;
}

}  // namespace rsf
