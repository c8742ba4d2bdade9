#include "rsf/verify.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Core>

#include "rsf/error.hpp"
#include "rsf/experiment.hpp"
#include "rsf/learn.hpp"
#include "rsf/model.hpp"
#include "rsf/operators.hpp"
#include "rsf/random.hpp"
#include "rsf/regress.hpp"

namespace rsf::verify {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(4);
    os << v;
    return os.str();
}

template <class F>
Check timed(const std::string& name, F&& body) {
    Check c;
    c.name = name;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(c);
    } catch (const std::exception& e) {
        c.passed = false;
        c.detail = std::string("error: ") + e.what();
    }
    c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return c;
}

Check count_check(const std::string& name, std::size_t expected, const std::function<std::size_t()>& count) {
    return timed(name, [&](Check& c) {
        const std::size_t got = count();
        c.passed = got == expected;
        c.detail = "expected " + std::to_string(expected) + ", got " + std::to_string(got);
    });
}

GridFunction random_field(Philox& rng, const SpaceTimeGrid& g, double sd = 1.0) {
    std::vector<double> v(g.size());
    rng.fill_normal(v, sd);
    return GridFunction(g, std::move(v));
}

// Smooth periodic profile with a few random Fourier modes.
std::vector<double> smooth_profile(Philox& rng, const SpaceTimeGrid& g, int modes = 3) {
    std::vector<double> v(static_cast<std::size_t>(g.nx), 0.0);
    for (int k = 1; k <= modes; ++k) {
        const double a = rng.next_normal() / k, b = rng.next_normal() / k;
        for (int i = 0; i < g.nx; ++i) {
            const double th = 2.0 * std::numbers::pi * k * (g.x(i) - g.x_min) / g.length();
            v[static_cast<std::size_t>(i)] += a * std::sin(th) + b * std::cos(th);
        }
    }
    return v;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double max_abs(std::span<const double> a) {
    double m = 0.0;
    for (double v : a) m = std::max(m, std::abs(v));
    return m;
}

}  // namespace

std::vector<Check> count_checks(const Options& opts) {
    std::vector<Check> out;
    auto raw = [](int n, Alpha a, std::vector<std::string> J) {
        return [=] { return enumerate(n, a, J).size(); };
    };
    auto filtered = [&](const std::string& preset_name, bool override_degree) {
        return [=, &opts] {
            ExperimentConfig cfg = preset(preset_name);
            if (override_degree && opts.degree_override) cfg.features.degree = *opts.degree_override;
            return experiment_features(cfg, cfg.features.J).size();
        };
    };
    out.push_back(count_check("count: n=1 alpha=(2,2,1,1) J={c}", 9, raw(1, {2, 2, 1, 1}, {"c"})));
    out.push_back(count_check("count: n=1 alpha=(2,2,1,0) J={c}", 5, raw(1, {2, 2, 1, 0}, {"c"})));
    out.push_back(count_check("count: parabolic-mult n=4 gamma=5", 56, filtered("parabolic-mult", true)));
    out.push_back(count_check("count: parabolic-add n=5 gamma=7.5", 58, filtered("parabolic-add", true)));
    out.push_back(count_check("count: wave n=4 J={c,s} gamma=1.5", 60, filtered("wave", false)));
    out.push_back(count_check("count: burgers n=3 unfiltered", 91, raw(3, {2, 0, 0, 1}, {"c"})));
    out.push_back(count_check("count: burgers n=3 gamma=2.5", 20, filtered("burgers", false)));
    return out;
}

Check signature_oracle_check(const Options& opts, int paths) {
    return timed("signature: model vs Chen concatenation, level 3, dims 2 and 3", [&](Check& c) {
        ExperimentConfig cfg = preset("signature-check");
        cfg.paths = paths;
        const auto res = signature_check(cfg, opts.inject_signature_fault);
        double worst = 0.0;
        int wd = 0, wp = 0;
        for (const auto& r : res)
            if (!(r.rel_error <= worst)) {
                worst = r.rel_error;
                wd = r.dim;
                wp = r.path;
            }
        c.passed = worst <= 1e-6;
        c.detail = "worst relative error " + fmt(worst) + " (dim " + std::to_string(wd) + ", path " +
                   std::to_string(wp) + "), tolerance 1e-6";
    });
}

Check heat_eigenmode_check() {
    return timed("operators: heat eigenmode decay, order >= 1 in time", [](Check& c) {
        const double nu = 1.0, T = 0.1;
        const int nx = 32;
        std::vector<double> errs;
        for (int N : {100, 200, 400}) {
            const SpaceTimeGrid g{0.0, T, N, 0.0, 1.0, nx, 1, true};
            std::vector<double> u0(nx);
            for (int i = 0; i < nx; ++i) u0[static_cast<std::size_t>(i)] = std::sin(2.0 * std::numbers::pi * g.x(i));
            const auto w = OperatorBundle::heat(g, nu).initial_flow(u0);
            const double lam = 4.0 / (g.dx() * g.dx()) * std::pow(std::sin(std::numbers::pi * g.dx()), 2);
            double e = 0.0;
            for (int k = 0; k <= N; ++k)
                for (int i = 0; i < nx; ++i)
                    e = std::max(e, std::abs(w(k, i) - std::exp(-nu * lam * g.t(k)) * u0[static_cast<std::size_t>(i)]));
            errs.push_back(e);
        }
        const double o1 = std::log2(errs[0] / errs[1]), o2 = std::log2(errs[1] / errs[2]);
        c.passed = o1 >= 0.9 && o2 >= 0.9 && errs[2] < 1e-2;
        c.detail = "max errors " + fmt(errs[0]) + ", " + fmt(errs[1]) + ", " + fmt(errs[2]) + "; observed orders " +
                   fmt(o1) + ", " + fmt(o2);
    });
}

Check wave_eigenmode_check() {
    return timed("operators: wave eigenmode oscillation, order >= 2 in time", [](Check& c) {
        const double T = 1.0;
        const int nx = 32;
        std::vector<double> errs;
        for (int N : {64, 128, 256}) {
            const SpaceTimeGrid g{0.0, T, N, 0.0, 1.0, nx, 1, true};
            std::vector<double> u0(nx);
            for (int i = 0; i < nx; ++i) u0[static_cast<std::size_t>(i)] = std::sin(2.0 * std::numbers::pi * g.x(i));
            const auto w = OperatorBundle::wave(g).initial_flow(u0);
            const double om = 2.0 / g.dx() * std::sin(std::numbers::pi * g.dx());
            double e = 0.0;
            for (int k = 0; k <= N; ++k)
                for (int i = 0; i < nx; ++i)
                    e = std::max(e, std::abs(w(k, i) - std::cos(om * g.t(k)) * u0[static_cast<std::size_t>(i)]));
            errs.push_back(e);
        }
        const double o1 = std::log2(errs[0] / errs[1]), o2 = std::log2(errs[1] / errs[2]);
        c.passed = o1 >= 1.8 && o2 >= 1.8 && errs[2] < 1e-2;
        c.detail = "max errors " + fmt(errs[0]) + ", " + fmt(errs[1]) + ", " + fmt(errs[2]) + "; observed orders " +
                   fmt(o1) + ", " + fmt(o2);
    });
}

Check operator_linearity_check() {
    return timed("properties: operator linearity (heat, wave, time integral)", [](Check& c) {
        Philox rng(11, 9);
        const SpaceTimeGrid g{0.0, 0.5, 60, 0.0, 1.0, 24, 1, true};
        SpaceTimeGrid g0 = g;
        g0.d = 0;
        g0.periodic = false;
        double worst = 0.0;
        const double a = 1.3, b = -0.7;
        for (const auto& ops : {OperatorBundle::heat(g, 0.3), OperatorBundle::wave(g), OperatorBundle::time_integral(g0)}) {
            const auto f = random_field(rng, ops.grid()), h = random_field(rng, ops.grid());
            std::vector<double> mix(f.values().size());
            for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = a * f.values()[i] + b * h.values()[i];
            const auto lhs = ops.apply(GridFunction(ops.grid(), mix));
            const auto If = ops.apply(f), Ih = ops.apply(h);
            std::vector<double> rhs(mix.size());
            for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = a * If.values()[i] + b * Ih.values()[i];
            worst = std::max(worst, max_abs_diff(lhs.values(), rhs) / std::max(1e-300, max_abs(rhs)));
        }
        c.passed = worst < 1e-12;
        c.detail = "max relative deviation " + fmt(worst) + ", tolerance 1e-12";
    });
}

namespace {

struct Counts {
    int xi = 0;
    int c = 0;
};

Counts homogeneity(const Symbol& s) {
    if (s.is_initial()) return {0, s.name() == "c" ? 1 : 0};
    Counts r{s.forcing_power(), 0};
    for (const auto& f : s.factors()) {
        const auto sub = homogeneity(f.symbol);
        r.xi += sub.xi;
        r.c += sub.c;
    }
    return r;
}

}  // namespace

Check multilinearity_check() {
    return timed("properties: model multilinearity in (xi, u^c)", [](Check& c) {
        Philox rng(12, 9);
        const SpaceTimeGrid g{0.0, 0.2, 40, 0.0, 1.0, 16, 1, true};
        const auto ops = OperatorBundle::heat(g, 0.5);
        const FeatureSet fs = enumerate(2, {2, 2, 1, 1}, {"c"});
        const auto xi = random_field(rng, g);
        const auto uc = ops.initial_flow(smooth_profile(rng, g));
        const double a = 1.7, b = -0.6;
        ModelInput in1, in2;
        in1.xi = {xi};
        in1.u_init.emplace("c", uc);
        std::vector<double> xs(xi.values().begin(), xi.values().end()), cs(uc.values().begin(), uc.values().end());
        for (double& v : xs) v *= a;
        for (double& v : cs) v *= b;
        in2.xi = {GridFunction(g, xs)};
        in2.u_init.emplace("c", GridFunction(g, cs));
        const auto m1 = evaluate(fs, in1, ops), m2 = evaluate(fs, in2, ops);
        double worst = 0.0;
        for (std::size_t j = 0; j < fs.size(); ++j) {
            const auto h = homogeneity(fs.symbols[j]);
            const double f = std::pow(a, h.xi) * std::pow(b, h.c);
            std::vector<double> expect(m1[j].values().begin(), m1[j].values().end());
            for (double& v : expect) v *= f;
            const double scale = std::max(1e-300, max_abs(expect));
            worst = std::max(worst, max_abs_diff(m2[j].values(), expect) / scale);
        }
        c.passed = worst < 1e-10;
        c.detail = std::to_string(fs.size()) + " symbols, max relative deviation " + fmt(worst);
    });
}

Check memoization_check() {
    return timed("properties: memoization transparency", [](Check& c) {
        Philox rng(13, 9);
        const SpaceTimeGrid g{0.0, 0.2, 30, 0.0, 1.0, 16, 1, true};
        const auto ops = OperatorBundle::heat(g, 0.5);
        const FeatureSet fs = enumerate(2, {2, 2, 1, 1}, {"c"});
        ModelInput in;
        in.xi = {random_field(rng, g)};
        in.u_init.emplace("c", ops.initial_flow(smooth_profile(rng, g)));
        const auto a = evaluate(fs, in, ops, {true});
        const auto b = evaluate(fs, in, ops, {false});
        std::size_t differ = 0;
        for (std::size_t j = 0; j < fs.size(); ++j)
            if (!std::equal(a[j].values().begin(), a[j].values().end(), b[j].values().begin())) ++differ;
        c.passed = differ == 0 && a.keys() == b.keys();
        c.detail = std::to_string(differ) + " of " + std::to_string(fs.size()) + " features differ bitwise";
    });
}

Check ols_nested_check() {
    return timed("properties: OLS nested-model residuals", [](Check& c) {
        Philox rng(14, 9);
        const int rows = 60, cols = 8;
        Eigen::MatrixXd X(rows, cols);
        Eigen::VectorXd y(rows);
        for (int i = 0; i < rows; ++i) {
            for (int j = 0; j < cols; ++j) X(i, j) = rng.next_normal();
            y(i) = rng.next_normal();
        }
        double prev = std::numeric_limits<double>::infinity();
        bool ok = true;
        std::string trail;
        for (int k = 1; k <= cols; ++k) {
            const auto fit = ols_fit(X.leftCols(k), y);
            ok = ok && fit.diagnostics.residual_norm <= prev * (1.0 + 1e-12);
            prev = fit.diagnostics.residual_norm;
            trail += (trail.empty() ? "" : " ") + fmt(prev);
        }
        c.passed = ok;
        c.detail = "residuals for 1.." + std::to_string(cols) + " features: " + trail;
    });
}

Check picard_span_check() {
    return timed("properties: Picard iterates lie in the model span (n <= 2)", [](Check& c) {
        Philox rng(15, 9);
        const SpaceTimeGrid g{0.0, 0.2, 40, 0.0, 1.0, 16, 1, true};
        const auto ops = OperatorBundle::heat(g, 1.0);
        const auto xi = random_field(rng, g);
        const auto uc = ops.initial_flow(smooth_profile(rng, g));
        // mu(u) = u - u^2 has no constant term; sigma(u) = 1 + u. Widths (m, l) = (2, 1 + 1).
        auto mu = [](double u) { return u - u * u; };
        auto sigma = [](double u) { return 1.0 + u; };
        ModelInput in;
        in.xi = {xi};
        in.u_init.emplace("c", uc);
        GridFunction u = uc;
        double worst = 0.0;
        std::string detail;
        for (int n = 1; n <= 2; ++n) {
            std::vector<double> rhs(g.size());
            for (std::size_t i = 0; i < rhs.size(); ++i)
                rhs[i] = mu(u.values()[i]) + sigma(u.values()[i]) * xi.values()[i];
            const auto Iu = ops.apply(GridFunction(g, std::move(rhs)));
            std::vector<double> next(g.size());
            for (std::size_t i = 0; i < next.size(); ++i) next[i] = uc.values()[i] + Iu.values()[i];
            u = GridFunction(g, std::move(next));

            const FeatureSet fs = enumerate(n, {2, 2, 1, 0}, {"c"});
            const auto mv = evaluate(fs, in, ops);
            Eigen::MatrixXd X(static_cast<Eigen::Index>(g.size()), static_cast<Eigen::Index>(fs.size()));
            for (std::size_t j = 0; j < fs.size(); ++j)
                for (std::size_t p = 0; p < g.size(); ++p)
                    X(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(j)) = mv[j].values()[p];
            const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(u.values().data(), static_cast<Eigen::Index>(g.size()));
            const auto fit = ols_fit(X, y);
            const double rel = fit.diagnostics.residual_norm / y.norm();
            worst = std::max(worst, rel);
            detail += (detail.empty() ? "" : ", ") + ("n=" + std::to_string(n) + ": " + std::to_string(fs.size()) +
                                                       " features, relative residual " + fmt(rel));
        }
        c.passed = worst < 1e-8;
        c.detail = detail;
    });
}

Check rollout_closure_check() {
    return timed("properties: Algorithm 4 rollout closure on heat-flow data", [](Check& c) {
        Philox rng(16, 9);
        const SpaceTimeGrid g{0.0, 0.2, 20, 0.0, 1.0, 32, 1, true};
        const double nu = 0.1;
        const int sub = 5;
        const auto flow = OperatorBundle::heat(substep_grid(g, sub), nu);
        std::vector<GridFunction> data;
        for (int s = 0; s < 4; ++s) {
            GridFunction u(g);
            const auto p = smooth_profile(rng, g, 4);
            std::copy(p.begin(), p.end(), u.row(0).begin());
            for (int k = 0; k < g.N; ++k) {
                const auto w = flow.initial_flow(u.row(k));
                std::copy(w.row(sub).begin(), w.row(sub).end(), u.row(k + 1).begin());
            }
            data.push_back(std::move(u));
        }
        Alg4Config cfg;
        cfg.features = enumerate(1, {2, 0, 0, 1}, {"c"});
        cfg.nu = nu;
        cfg.substeps = sub;
        const auto model = alg4_train(cfg, data);
        double worst = 0.0;
        for (const auto& u : data) worst = std::max(worst, rel_l2(alg4_predict(model, cfg, u.slice(0)), u));
        c.passed = worst < 1e-6;
        c.detail = "max rollout relative l2 error " + fmt(worst) + " over " + std::to_string(data.size()) +
                   " trajectories, tolerance 1e-6";
    });
}

std::vector<Suite> suites() {
    return {
        {"counts", [](const Options& o) { return count_checks(o); }},
        {"signature", [](const Options& o) { return std::vector<Check>{signature_oracle_check(o)}; }},
        {"operators",
         [](const Options&) { return std::vector<Check>{heat_eigenmode_check(), wave_eigenmode_check()}; }},
        {"properties",
         [](const Options&) {
             return std::vector<Check>{operator_linearity_check(), multilinearity_check(), memoization_check(),
                                       ols_nested_check(),         picard_span_check(),    rollout_closure_check()};
         }},
    };
}

std::vector<Check> run_all(const Options& opts) {
    std::vector<Check> out;
    for (const auto& s : suites()) {
        auto part = s.run(opts);
        out.insert(out.end(), part.begin(), part.end());
    }
    return out;
}

}  // namespace rsf::verify
