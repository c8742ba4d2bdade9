#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "rsf/error.hpp"
#include "rsf/operators.hpp"
#include "rsf/random.hpp"

using namespace rsf;

namespace {

constexpr double kPi = std::numbers::pi;

SpatialFunction mode(const SpaceTimeGrid& g, int k) {
    std::vector<double> v(static_cast<std::size_t>(g.nx));
    for (int i = 0; i < g.nx; ++i) v[static_cast<std::size_t>(i)] = std::sin(2 * kPi * k * (g.x(i) - g.x_min) / g.length());
    return SpatialFunction(v);
}

// Eigenvalue of the periodic central second difference on the mode sin(2 pi k x / L).
double discrete_laplacian_symbol(const SpaceTimeGrid& g, int k) {
    return (2.0 - 2.0 * std::cos(2 * kPi * k * g.dx() / g.length())) / (g.dx() * g.dx());
}

GridFunction random_field(const SpaceTimeGrid& g, std::uint64_t seed) {
    Philox rng(seed);
    std::vector<double> v(g.size());
    rng.fill_normal(v);
    return GridFunction(g, std::move(v));
}

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

TEST(Heat, ZeroForcingGivesZero) {
    const SpaceTimeGrid g{0.0, 1.0, 50, 0.0, 1.0, 40, 1, true};
    for (const auto f = heat_I(GridFunction(g), 1.0); double v : f.values()) EXPECT_EQ(v, 0.0);
}

TEST(Heat, DuhamelForSteadyModeForcing) {
    const SpaceTimeGrid g{0.0, 1.0, 4000, 0.0, 1.0, 100, 1, true};
    const double nu = 0.1;
    const auto m = mode(g, 1);
    const auto f = GridFunction::constant_in_time(g, m.values());
    const auto u = heat_I(f, nu);
    const double lam = std::pow(2 * kPi, 2);
    for (int k : {400, 2000, 4000}) {
        const double amp = (1 - std::exp(-nu * lam * g.t(k))) / (nu * lam);
        for (int i : {10, 25, 60}) EXPECT_NEAR(u(k, i), amp * m[static_cast<std::size_t>(i)], 2e-3 * amp) << k << "," << i;
    }
}

TEST(Heat, ConstantsAreInvariant) {
    const SpaceTimeGrid g{0.0, 1.0, 20, 0.0, 1.0, 30, 1, true};
    const auto u = heat_Ic(SpatialFunction(std::vector<double>(30, -1.75)), g, 0.7);
    for (double v : u.values()) EXPECT_NEAR(v, -1.75, 1e-13);
}

TEST(Heat, EigenmodeMatchesDiscreteSymbolExactly) {
    const SpaceTimeGrid g{0.0, 0.5, 100, -8.0, 8.0, 128, 1, true};
    const double nu = 0.3;
    const int k = 3;
    const auto u = heat_Ic(mode(g, k), g, nu);
    const double factor = 1.0 / (1.0 + nu * g.dt() * discrete_laplacian_symbol(g, k));
    const auto m = mode(g, k);
    for (int s : {1, 17, 100})
        for (int i : {5, 40, 111}) EXPECT_NEAR(u(s, i), std::pow(factor, s) * m[static_cast<std::size_t>(i)], 1e-12);
}

TEST(Heat, EigenmodeDecayConvergesAtFirstOrder) {
    const double nu = 1.0, T = 0.05;
    const int k = 1;
    double prev = 0.0;
    for (int N : {50, 100, 200, 400}) {
        const SpaceTimeGrid g{0.0, T, N, 0.0, 1.0, 200, 1, true};
        const auto u = heat_Ic(mode(g, k), g, nu);
        // Against the semi-discrete flow so only the time error is measured.
        const double exact = std::exp(-nu * discrete_laplacian_symbol(g, k) * T);
        const double err = std::abs(u(N, 50) - exact * mode(g, k)[50]);
        if (prev > 0.0) {
            EXPECT_GT(std::log2(prev / err), 0.9) << "N=" << N;
        }
        prev = err;
    }
}

TEST(Heat, MassIsConserved) {
    const SpaceTimeGrid g{0.0, 1.0, 60, 0.0, 1.0, 50, 1, true};
    Philox rng(11);
    std::vector<double> v(50);
    rng.fill_normal(v);
    double mean0 = 0.0;
    for (double x : v) mean0 += x / 50;
    const auto u = heat_Ic(SpatialFunction(v), g, 0.5);
    for (int k = 0; k <= g.N; ++k) {
        double m = 0.0;
        for (double x : u.row(k)) m += x / 50;
        EXPECT_NEAR(m, mean0, 1e-10);
    }
}

TEST(Heat, TranslationEquivariance) {
    const SpaceTimeGrid g{0.0, 1.0, 30, 0.0, 1.0, 40, 1, true};
    const auto f = random_field(g, 5);
    std::vector<double> shifted(g.size());
    for (int k = 0; k <= g.N; ++k)
        for (int i = 0; i < g.nx; ++i) shifted[static_cast<std::size_t>(k * g.nx + (i + 7) % g.nx)] = f(k, i);
    const auto a = heat_I(f, 0.2);
    const auto b = heat_I(GridFunction(g, shifted), 0.2);
    for (int k = 0; k <= g.N; ++k)
        for (int i = 0; i < g.nx; ++i) EXPECT_NEAR(b(k, (i + 7) % g.nx), a(k, i), 1e-12);
}

TEST(Heat, NeedsPositiveViscosity) {
    const SpaceTimeGrid g{0.0, 1.0, 10, 0.0, 1.0, 10, 1, true};
    EXPECT_THROW(OperatorBundle::heat(g, 0.0), ConfigError);
    EXPECT_THROW(OperatorBundle::heat(g, -1.0), ConfigError);
}

TEST(Operators, AreLinear) {
    const SpaceTimeGrid g{0.0, 1.0, 64, 0.0, 1.0, 32, 1, true};
    const SpaceTimeGrid g0{0.0, 1.0, 64, 0.0, 1.0, 3, 0, true};
    struct Case {
        OperatorBundle op;
        SpaceTimeGrid grid;
    };
    for (const auto& c : {Case{OperatorBundle::heat(g, 0.4), g}, Case{OperatorBundle::wave(g), g},
                          Case{OperatorBundle::time_integral(g0), g0}}) {
        const auto f = random_field(c.grid, 21), h = random_field(c.grid, 22);
        std::vector<double> mix(c.grid.size());
        for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = 2.0 * f.values()[i] - 3.0 * h.values()[i];
        const auto lhs = c.op.apply(GridFunction(c.grid, mix));
        const auto a = c.op.apply(f), b = c.op.apply(h);
        std::vector<double> diff(mix.size());
        for (std::size_t i = 0; i < mix.size(); ++i) diff[i] = lhs.values()[i] - (2.0 * a.values()[i] - 3.0 * b.values()[i]);
        EXPECT_LT(max_abs(diff), 1e-12 * max_abs(lhs.values()));
    }
}

TEST(Wave, ZeroForcingGivesZero) {
    const SpaceTimeGrid g{0.0, 1.0, 100, 0.0, 1.0, 50, 1, true};
    for (const auto f = wave_I(GridFunction(g)); double v : f.values()) EXPECT_EQ(v, 0.0);
    for (const auto f = wave_Is(SpatialFunction(std::vector<double>(50, 0.0)), g); double v : f.values()) EXPECT_EQ(v, 0.0);
}

TEST(Wave, UnitForcingGivesHalfTSquared) {
    const SpaceTimeGrid g{0.0, 1.0, 100, 0.0, 1.0, 50, 1, true};
    const auto u = wave_I(GridFunction::from_function(g, [](double, double) { return 1.0; }));
    for (int k = 0; k <= g.N; ++k) EXPECT_NEAR(u(k, 13), 0.5 * g.t(k) * g.t(k), 1e-12);
}

TEST(Wave, ConstantSpeedGivesLinearGrowth) {
    const SpaceTimeGrid g{0.0, 1.0, 100, 0.0, 1.0, 50, 1, true};
    const auto u = wave_Is(SpatialFunction(std::vector<double>(50, 2.5)), g);
    for (int k = 0; k <= g.N; ++k) EXPECT_NEAR(u(k, 7), 2.5 * g.t(k), 1e-12);
}

TEST(Wave, EigenmodeMatchesLeapfrogRecurrence) {
    const SpaceTimeGrid g{0.0, 1.0, 200, 0.0, 1.0, 64, 1, true};
    const int k = 2;
    const auto u = wave_Ic(mode(g, k), g);
    const double h = g.dt();
    const double theta = std::acos(1.0 - 0.5 * h * h * discrete_laplacian_symbol(g, k));
    const auto m = mode(g, k);
    for (int s : {1, 50, 200})
        for (int i : {3, 30}) EXPECT_NEAR(u(s, i), std::cos(theta * s) * m[static_cast<std::size_t>(i)], 1e-10);
}

TEST(Wave, EigenmodeConvergesAtSecondOrder) {
    double prev = 0.0;
    for (int nx : {32, 64, 128}) {
        const SpaceTimeGrid g{0.0, 1.0, 2 * nx, 0.0, 1.0, nx, 1, true};
        const auto u = wave_Ic(mode(g, 1), g);
        double err = 0.0;
        for (int i = 0; i < nx; ++i) err = std::max(err, std::abs(u(g.N, i) - std::cos(2 * kPi) * mode(g, 1)[i]));
        if (prev > 0.0) {
            EXPECT_GT(std::log2(prev / err), 1.8) << "nx=" << nx;
        }
        prev = err;
    }
}

TEST(Wave, CflViolationIsAConfigError) {
    const SpaceTimeGrid g{0.0, 1.0, 10, 0.0, 1.0, 50, 1, true};
    EXPECT_THROW(check_cfl(g), ConfigError);
    EXPECT_THROW(wave_I(GridFunction(g)), ConfigError);
}

TEST(TimeIntegral, ConstantAndLinearIntegrands) {
    const SpaceTimeGrid g{0.0, 1.0, 100, 0.0, 1.0, 2, 0, true};
    const auto one = time_integral_I(GridFunction::from_function(g, [](double, double) { return 1.0; }));
    const auto ramp = GridFunction::from_function(g, [](double t, double) { return 2 * t; });
    const auto trap = time_integral_I(ramp, Quadrature::Trapezoid);
    const auto left = time_integral_I(ramp, Quadrature::LeftPoint);
    for (int k = 0; k <= g.N; ++k) {
        const double t = g.t(k);
        EXPECT_NEAR(one(k, 0), t, 1e-13);
        EXPECT_NEAR(trap(k, 1), t * t, 1e-13);
        EXPECT_NEAR(left(k, 1), t * t, g.dt() * t + 1e-13);
    }
    for (const auto f = time_integral_I(GridFunction(g)); double v : f.values()) EXPECT_EQ(v, 0.0);
}

TEST(TimeIntegral, NeedsAPathGrid) {
    const SpaceTimeGrid g{0.0, 1.0, 10, 0.0, 1.0, 5, 1, true};
    EXPECT_THROW(OperatorBundle::time_integral(g), ConfigError);
}

TEST(Operators, UnconfiguredBundleRefusesToRun) {
    const SpaceTimeGrid g{0.0, 1.0, 10, 0.0, 1.0, 5, 1, true};
    EXPECT_THROW(OperatorBundle().apply(GridFunction(g)), ConfigError);
}

TEST(Tridiagonal, SolvesTheCyclicSystem) {
    const int n = 9;
    const double diag = 3.0, off = -1.25;
    PeriodicTridiagonal t(n, diag, off);
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = std::sin(i + 0.3);
    std::vector<double> r(n);
    for (int i = 0; i < n; ++i)
        r[static_cast<std::size_t>(i)] = diag * x[static_cast<std::size_t>(i)] +
                                         off * (x[static_cast<std::size_t>((i + 1) % n)] + x[static_cast<std::size_t>((i + n - 1) % n)]);
    t.solve(r);
    for (int i = 0; i < n; ++i) EXPECT_NEAR(r[static_cast<std::size_t>(i)], x[static_cast<std::size_t>(i)], 1e-13);
}
