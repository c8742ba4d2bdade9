// Acceptance run: one PASS/FAIL line per criterion on stdout, progress on stderr.
//
//   rsf_acceptance [--work DIR] [--only NAME[,NAME...]] [--quiet]
//
// Datasets are generated under DIR on first use and reused afterwards when the stored
// configuration matches. The exit code is the number of failed criteria (capped at 100).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rsf/dataset.hpp"
#include "rsf/error.hpp"
#include "rsf/experiment.hpp"
#include "rsf/log.hpp"
#include "rsf/verify.hpp"

using namespace rsf;
namespace fs = std::filesystem;

namespace {

// Tolerances. Changing any of these changes what "accepted" means.
constexpr double kDeskScale = 0.3;
constexpr double kMultMaxError = 0.12;
constexpr double kMultSlopeLo = 0.9, kMultSlopeHi = 1.1;
constexpr double kAddMaxErrorEarly = 0.10;
constexpr double kAddMaxErrorLate = 0.30;
constexpr double kWaveMaxErrorCS = 0.05;
constexpr double kWaveMinErrorNone = 0.40;
constexpr double kWaveMinRatio = 8.0;
constexpr int kBurgersRepeats = 3;
constexpr double kBurgersMaxError = 0.06;
constexpr double kBurgersMaxErrorNoisy = 0.12;
constexpr double kViscosityLo = 0.08, kViscosityHi = 0.12;
constexpr double kPdeFindA = 0.12, kPdeFindB = -0.96, kPdeFindTol = 0.03;
constexpr double kPdeFindNoisyMaxA = 0.05;
constexpr double kEulerBlowup = 1.0;
constexpr double kAlg4Stable = 0.15;

struct Result {
    std::string name;
    bool passed = false;
    std::string detail;
};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

std::string pct(double v) { return std::isfinite(v) ? fmt(100.0 * v) + "%" : "inf"; }

double mean_of(const std::vector<double>& v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Generates the dataset for cfg under work/name unless an identical one is already there.
SampleStore store_for(const ExperimentConfig& cfg, const fs::path& work, const std::string& name) {
    const fs::path dir = work / name;
    bool reuse = false;
    if (fs::exists(dataset::meta_path(dir))) {
        try {
            reuse = dataset_config(dir) == cfg;
        } catch (const Error&) {
            reuse = false;
        }
    }
    if (!reuse) {
        std::cerr << "[acceptance] generating " << name << " dataset in " << dir << "\n";
        fs::remove_all(dir);
        generate_dataset(cfg, dir);
    }
    return SampleStore(cfg, dir);
}

const Aggregate& need(const PredictionReport& rep, const std::string& variant) {
    if (const auto* a = rep.find(variant)) return *a;
    std::string msg = "report has no variant '" + variant + "'";
    if (!rep.failures.empty()) msg += " (first failure: " + rep.failures.front() + ")";
    throw std::runtime_error(msg);
}

Result checks_result(const std::string& name, const std::vector<verify::Check>& checks) {
    Result r{name, true, ""};
    int failed = 0;
    std::string first;
    for (const auto& c : checks) {
        if (c.passed) continue;
        ++failed;
        r.passed = false;
        if (first.empty()) first = c.name + ": " + c.detail;
    }
    r.detail = std::to_string(checks.size() - static_cast<std::size_t>(failed)) + "/" + std::to_string(checks.size()) +
               " checks pass";
    if (failed) r.detail += "; first failure " + first;
    return r;
}

Result counts() { return checks_result("symbol-counts", verify::count_checks()); }

Result signature() {
    const auto c = verify::signature_oracle_check();
    return {"signature-oracle", c.passed && c.seconds < 10.0, c.detail + ", " + fmt(c.seconds) + " s"};
}

Result operators() {
    const std::vector<verify::Check> checks{verify::heat_eigenmode_check(), verify::wave_eigenmode_check()};
    auto r = checks_result("operator-analytic", checks);
    double secs = 0.0;
    for (const auto& c : checks) {
        secs += c.seconds;
        r.detail += "; " + c.detail;
    }
    r.passed = r.passed && secs < 30.0;
    r.detail += "; " + fmt(secs) + " s";
    return r;
}

Result parabolic_mult(const fs::path& work) {
    auto cfg = preset("parabolic-mult");
    cfg.scale = kDeskScale;
    const auto rep = run_experiment(store_for(cfg, work, "parabolic-mult"));
    const auto& h4 = need(rep, "J=none h=4 t=1 x=0.5");
    const auto& h1 = need(rep, "J=none h=1 t=1 x=0.5");
    const bool ok = h4.mean <= kMultMaxError && h4.mean_slope >= kMultSlopeLo && h4.mean_slope <= kMultSlopeHi &&
                    h4.mean < h1.mean;
    return {"parabolic-mult", ok,
            "(1,0.5) h=4 error " + pct(h4.mean) + " (<= " + pct(kMultMaxError) + "), slope " + fmt(h4.mean_slope) +
                " (in [" + fmt(kMultSlopeLo) + ", " + fmt(kMultSlopeHi) + "]), h=1 error " + pct(h1.mean) + " over " +
                std::to_string(cfg.repeats) + " repeats"};
}

Result parabolic_add(const fs::path& work) {
    auto cfg = preset("parabolic-add");
    cfg.scale = kDeskScale;
    const auto rep = run_experiment(store_for(cfg, work, "parabolic-add"));
    const auto& early = need(rep, "J=none h=5 t=0.5 x=0.5");
    const auto& late = need(rep, "J=none h=5 t=1 x=0.5");
    const bool ok = early.mean <= kAddMaxErrorEarly && late.mean <= kAddMaxErrorLate;
    return {"parabolic-add", ok,
            "(0.5,0.5) error " + pct(early.mean) + " (<= " + pct(kAddMaxErrorEarly) + "), (1,0.5) error " +
                pct(late.mean) + " (<= " + pct(kAddMaxErrorLate) + ")"};
}

Result wave(const fs::path& work) {
    auto cfg = preset("wave");
    cfg.scale = kDeskScale;
    const auto rep = run_experiment(store_for(cfg, work, "wave"));
    const auto& cs = need(rep, "J=c+s h=4 t=1 x=0.5");
    const auto& none = need(rep, "J=none h=4 t=1 x=0.5");
    const double ratio = none.mean / cs.mean;
    const bool ok = cs.mean <= kWaveMaxErrorCS && none.mean >= kWaveMinErrorNone && ratio >= kWaveMinRatio;
    return {"wave-contrast", ok,
            "J={c,s} error " + pct(cs.mean) + " (<= " + pct(kWaveMaxErrorCS) + "), J=none error " + pct(none.mean) +
                " (>= " + pct(kWaveMinErrorNone) + "), ratio " + fmt(ratio) + " (>= " + fmt(kWaveMinRatio) + ")"};
}

struct BurgersOutcome {
    PredictionReport rep;
    bool ran = false;
};

const PredictionReport& burgers_report(const fs::path& work, BurgersOutcome& cache) {
    if (!cache.ran) {
        auto cfg = preset("burgers");
        cfg.repeats = kBurgersRepeats;
        cfg.variants = {"alg4", "alg4-noisy", "euler", "pdefind", "pdefind-noisy"};
        cache.rep = run_experiment(store_for(cfg, work, "burgers"));
        cache.ran = true;
        for (const auto& f : cache.rep.failures) std::cerr << "[acceptance] burgers: " << f << "\n";
    }
    return cache.rep;
}

std::size_t diverged(const PredictionReport& rep, const std::string& variant) {
    return static_cast<std::size_t>(std::count_if(rep.cases.begin(), rep.cases.end(), [&](const CaseResult& c) {
        return c.variant == variant && !std::isfinite(c.rel_l2);
    }));
}

double finite_mean(const PredictionReport& rep, const std::string& variant) {
    std::vector<double> v;
    for (const auto& c : rep.cases)
        if (c.variant == variant && std::isfinite(c.rel_l2)) v.push_back(c.rel_l2);
    return mean_of(v);
}

Result burgers(const fs::path& work, BurgersOutcome& cache) {
    const auto& rep = burgers_report(work, cache);
    const auto series = [&](const std::string& k) {
        const auto it = rep.series.find(k);
        return it == rep.series.end() ? std::vector<double>{} : it->second;
    };
    const double nu = mean_of(series("nu_estimate"));
    const auto* clean = rep.find("alg4");
    const auto* noisy = rep.find("alg4-noisy");
    const double ce = clean ? clean->mean : std::numeric_limits<double>::infinity();
    const double ne = noisy ? noisy->mean : std::numeric_limits<double>::infinity();
    const bool ok = ce <= kBurgersMaxError && ne <= kBurgersMaxErrorNoisy && nu >= kViscosityLo && nu <= kViscosityHi;
    const auto describe = [&](const std::string& variant, double mean, double limit) {
        std::string d = variant + " error " + pct(mean) + " (<= " + pct(limit) + ")";
        if (const std::size_t bad = diverged(rep, variant)) {
            const auto* a = rep.find(variant);
            d += " with " + std::to_string(bad) + "/" + std::to_string(a ? a->count : 0) + " rollouts diverged";
            if (a && bad < a->count) d += ", mean over the rest " + pct(finite_mean(rep, variant));
        }
        return d;
    };
    std::string detail = describe("alg4", ce, kBurgersMaxError) + ", " +
                         describe("alg4-noisy", ne, kBurgersMaxErrorNoisy) + ", viscosity estimate " + fmt(nu) +
                         " (in [" + fmt(kViscosityLo) + ", " + fmt(kViscosityHi) + "]) over " +
                         std::to_string(kBurgersRepeats) + " repeats";
    return {"burgers", ok, detail};
}

Result baselines(const fs::path& work, BurgersOutcome& cache) {
    const auto& rep = burgers_report(work, cache);
    const auto series = [&](const std::string& k) {
        const auto it = rep.series.find(k);
        return it == rep.series.end() ? std::vector<double>{} : it->second;
    };
    const double a = mean_of(series("pdefind a")), b = mean_of(series("pdefind b"));
    const double an = mean_of(series("pdefind-noisy a"));
    const bool pde_ok = std::abs(a - kPdeFindA) <= kPdeFindTol && std::abs(b - kPdeFindB) <= kPdeFindTol;
    const bool noisy_ok = std::abs(an) < kPdeFindNoisyMaxA;

    // Euler and alg4 early-horizon errors, matched case by case.
    std::vector<const CaseResult*> euler, alg4;
    for (const auto& c : rep.cases) {
        if (c.variant.rfind("euler max", 0) == 0) euler.push_back(&c);
        if (c.variant.rfind("alg4 max", 0) == 0) alg4.push_back(&c);
    }
    std::size_t blown = 0, contrast = 0;
    for (const auto* e : euler) {
        if (!(e->rel_l2 > kEulerBlowup)) continue;
        ++blown;
        for (const auto* g : alg4)
            if (g->repeat == e->repeat && g->index == e->index && g->rel_l2 < kAlg4Stable) ++contrast;
    }
    const bool euler_ok = !euler.empty() && 2 * contrast >= euler.size();
    const bool ok = pde_ok && noisy_ok && euler_ok;
    return {"baselines", ok,
            "pdefind (a, b) = (" + fmt(a) + ", " + fmt(b) + ") (within " + fmt(kPdeFindTol) + " of (" + fmt(kPdeFindA) +
                ", " + fmt(kPdeFindB) + ")), noisy a = " + fmt(an) + " (|a| < " + fmt(kPdeFindNoisyMaxA) +
                "), euler > " + pct(kEulerBlowup) + " early on " + std::to_string(blown) + "/" +
                std::to_string(euler.size()) + " cases, of which alg4 < " + pct(kAlg4Stable) + " on " +
                std::to_string(contrast)};
}

Result properties() {
    const auto checks = std::vector<verify::Check>{verify::multilinearity_check(), verify::operator_linearity_check(),
                                                   verify::memoization_check(),   verify::ols_nested_check(),
                                                   verify::picard_span_check(),   verify::rollout_closure_check()};
    return checks_result("properties", checks);
}

}  // namespace

int main(int argc, char** argv) {
    fs::path work = "acceptance_work";
    std::set<std::string> only;
    bool quiet = false;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--work" && i + 1 < argc) {
            work = argv[++i];
        } else if (a == "--only" && i + 1 < argc) {
            std::stringstream ss(argv[++i]);
            for (std::string s; std::getline(ss, s, ',');) only.insert(s);
        } else if (a == "--quiet") {
            quiet = true;
        } else {
            std::cerr << "usage: rsf_acceptance [--work DIR] [--only NAME[,NAME...]] [--quiet]\n";
            return 2;
        }
    }
    log::set_level(quiet ? log::Level::Warn : log::Level::Info);
    fs::create_directories(work);

    BurgersOutcome burgers_cache;
    const std::vector<std::pair<std::string, std::function<Result()>>> criteria{
        {"symbol-counts", counts},
        {"signature-oracle", signature},
        {"operator-analytic", operators},
        {"parabolic-mult", [&] { return parabolic_mult(work); }},
        {"parabolic-add", [&] { return parabolic_add(work); }},
        {"wave-contrast", [&] { return wave(work); }},
        {"burgers", [&] { return burgers(work, burgers_cache); }},
        {"baselines", [&] { return baselines(work, burgers_cache); }},
        {"properties", properties},
    };

    int failed = 0;
    for (const auto& [name, run] : criteria) {
        if (!only.empty() && !only.count(name)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Result r;
        try {
            r = run();
        } catch (const std::exception& e) {
            r = {name, false, std::string("error: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!r.passed) ++failed;
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << " [" << fmt(secs) << " s]"
                  << std::endl;
    }
    return std::min(failed, 100);
}
