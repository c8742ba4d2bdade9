// rsf: dataset generation, experiment runs, self-checks and feature inspection.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "rsf/dataset.hpp"
#include "rsf/error.hpp"
#include "rsf/experiment.hpp"
#include "rsf/log.hpp"
#include "rsf/verify.hpp"

namespace fs = std::filesystem;

namespace {

struct Common {
    std::string config;
    std::string preset;
    std::optional<double> scale;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<int> repeats;
    std::string out;
};

void add_common(CLI::App* cmd, Common& c, bool with_out = true) {
    cmd->add_option("--config", c.config, "Experiment config (JSON)")->check(CLI::ExistingFile);
    cmd->add_option("--preset", c.preset, "Named preset instead of a config file")
        ->check(CLI::IsMember(rsf::preset_names()));
    cmd->add_option("--scale", c.scale, "Multiply sample and split counts");
    cmd->add_option("--seed", c.seed, "Base seed");
    cmd->add_option("--workers", c.workers, "Worker threads (0 = all cores)");
    cmd->add_option("--repeats", c.repeats, "Number of repeats with fresh splits");
    if (with_out) cmd->add_option("--out", c.out, "Output directory");
}

rsf::ExperimentConfig resolve(const Common& c) {
    if (!c.config.empty() && !c.preset.empty()) throw rsf::ConfigError("give either --config or --preset, not both");
    if (c.config.empty() && c.preset.empty()) throw rsf::ConfigError("one of --config or --preset is required");
    rsf::ExperimentConfig cfg = c.config.empty() ? rsf::preset(c.preset) : rsf::load_config(c.config);
    if (c.scale) cfg.scale = *c.scale;
    if (c.seed) cfg.seed = *c.seed;
    if (c.workers) cfg.workers = *c.workers;
    if (c.repeats) cfg.repeats = *c.repeats;
    cfg.validate();
    return cfg;
}

// Configs that produce the same dataset (worker count and repeat count do not change samples).
bool same_data(rsf::ExperimentConfig a, rsf::ExperimentConfig b) {
    a.workers = b.workers = 0;
    return a.experiment == b.experiment && a.grid == b.grid && a.nu == b.nu && a.samples == b.samples &&
           a.scale == b.scale && a.seed == b.seed && a.fine_grid == b.fine_grid && a.lambdas == b.lambdas &&
           a.modes == b.modes;
}

int cmd_generate(const Common& c) {
    const auto cfg = resolve(c);
    const fs::path out = c.out.empty() ? fs::path("data") / cfg.experiment : fs::path(c.out);
    rsf::generate_dataset(cfg, out);
    std::cerr << "dataset: " << out.string() << "\n";
    return 0;
}

int cmd_run(const Common& c, bool svg) {
    const fs::path out = c.out.empty() ? fs::path("data") : fs::path(c.out);
    const bool have_data = fs::exists(rsf::dataset::meta_path(out));
    rsf::ExperimentConfig cfg;
    if (!c.config.empty() || !c.preset.empty()) {
        cfg = resolve(c);
        if (have_data && !same_data(cfg, rsf::dataset_config(out)))
            throw rsf::ConfigError("dataset in " + out.string() +
                                   " was generated from a different config; regenerate it or pick another --out");
        if (!have_data) {
            rsf::log::info("no dataset in " + out.string() + ", generating it first");
            rsf::generate_dataset(cfg, out);
        }
    } else {
        if (!have_data) throw rsf::ConfigError("no dataset in " + out.string() + " and no --config/--preset given");
        cfg = rsf::dataset_config(out);
        if (c.scale || c.seed) throw rsf::ConfigError("--scale and --seed change the data; pass them to generate");
        if (c.workers) cfg.workers = *c.workers;
        if (c.repeats) cfg.repeats = *c.repeats;
        cfg.validate();
    }
    const rsf::SampleStore store(cfg, cfg.experiment == "signature-check" ? std::nullopt : std::optional<fs::path>(out));
    rsf::RunOptions opts;
    opts.out = out / "report";
    opts.svg = svg;
    const auto rep = rsf::run_experiment(store, opts);

    std::fprintf(stderr, "%-40s %6s %10s %10s %10s %8s\n", "variant", "cases", "mean", "min", "max", "slope");
    for (const auto& a : rep.aggregates)
        std::fprintf(stderr, "%-40s %6zu %9.3f%% %9.3f%% %9.3f%% %8.3f\n", a.variant.c_str(), a.count, 100 * a.mean,
                     100 * a.min, 100 * a.max, a.mean_slope);
    for (const auto& [k, v] : rep.series) {
        double m = 0.0;
        for (double x : v) m += x;
        std::fprintf(stderr, "%-40s mean %.5g over %zu repeats\n", k.c_str(), v.empty() ? 0.0 : m / v.size(), v.size());
    }
    for (const auto& f : rep.failures) std::fprintf(stderr, "failure: %s\n", f.c_str());
    std::cerr << "report: " << (out / "report").string() << "\n";
    return rep.failures.empty() ? 0 : 1;
}

int cmd_verify(const std::string& only, bool degree_fault, bool signature_fault) {
    rsf::verify::Options opts;
    opts.inject_signature_fault = signature_fault;
    if (degree_fault) {
        rsf::DegreeConfig bad;
        bad.beta = 1.0;
        bad.deg_xi = -0.5;
        opts.degree_override = bad;
    }
    int failed = 0, total = 0;
    bool matched = only.empty();
    for (const auto& s : rsf::verify::suites()) {
        if (!only.empty() && s.name != only) continue;
        matched = true;
        for (const auto& c : s.run(opts)) {
            ++total;
            if (!c.passed) ++failed;
            std::printf("[%s] %s: %s (%.2f s)\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str(), c.seconds);
        }
    }
    if (!matched) throw rsf::ConfigError("unknown suite '" + only + "' (counts, signature, operators, properties)");
    std::printf("%d of %d checks passed\n", total - failed, total);
    return failed == 0 ? 0 : 1;
}

int cmd_inspect(const Common& c, const std::string& jset) {
    const auto cfg = resolve(c);
    std::vector<std::string> J = cfg.features.J;
    if (!jset.empty()) {
        J.clear();
        if (jset != "none") {
            std::string cur;
            for (char ch : jset + ",") {
                if (ch == ',') {
                    if (!cur.empty()) J.push_back(cur);
                    cur.clear();
                } else {
                    cur += ch;
                }
            }
        }
    }
    const auto feats = rsf::experiment_features(cfg, J);
    const std::string text = rsf::to_json(feats, &cfg.features.degree) + "\n";
    if (c.out.empty()) {
        std::cout << text;
    } else {
        rsf::dataset::write_text(c.out, text);
    }
    std::cerr << feats.size() << " features\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Model feature vectors of space-time signals and regression experiments"};
    app.require_subcommand(1);
    bool verbose = false, quiet = false;
    app.add_flag("-v,--verbose", verbose, "Debug logging");
    app.add_flag("-q,--quiet", quiet, "Only warnings");

    Common gen_opts, run_opts, insp_opts;
    bool svg = false, degree_fault = false, signature_fault = false;
    std::string only, jset;

    auto* gen = app.add_subcommand("generate", "Generate a dataset directory");
    add_common(gen, gen_opts);
    auto* run = app.add_subcommand("run", "Run an experiment on a dataset and write reports");
    add_common(run, run_opts);
    run->add_flag("--svg", svg, "Also write SVG scatter plots and heat maps");
    auto* ver = app.add_subcommand("verify", "Run the fast self-check suite");
    ver->add_option("--suite", only, "Only run one suite: counts, signature, operators, properties");
    ver->add_flag("--inject-degree-fault", degree_fault, "Corrupt the degree config of the count checks");
    ver->add_flag("--inject-signature-fault", signature_fault, "Perturb one signature oracle value");
    auto* insp = app.add_subcommand("inspect-features", "Print the feature set of a config with degrees");
    add_common(insp, insp_opts);
    insp->add_option("--J", jset, "Override initialising symbols, comma separated or 'none'");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }
    rsf::log::set_level(quiet ? rsf::log::Level::Warn : verbose ? rsf::log::Level::Debug : rsf::log::Level::Info);

    try {
        if (*gen) return cmd_generate(gen_opts);
        if (*run) return cmd_run(run_opts, svg);
        if (*ver) return cmd_verify(only, degree_fault, signature_fault);
        if (*insp) return cmd_inspect(insp_opts, jset);
    } catch (const rsf::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
