#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "rsf/error.hpp"
#include "rsf/operators.hpp"
#include "rsf/solvers.hpp"

using namespace rsf;

namespace {

constexpr double kPi = std::numbers::pi;

const SpaceTimeGrid kUnit{0.0, 1.0, 1000, 0.0, 1.0, 100, 1, true};

SpatialFunction bump(const SpaceTimeGrid& g) {
    std::vector<double> v(static_cast<std::size_t>(g.nx));
    for (int i = 0; i < g.nx; ++i) v[static_cast<std::size_t>(i)] = g.x(i) * (1 - g.x(i));
    return SpatialFunction(v);
}

double energy(std::span<const double> row, double dx) {
    double e = 0.0;
    for (double v : row) e += v * v * dx;
    return e;
}

}  // namespace

TEST(WhiteNoise, VarianceAndMeanMatchTheCellSize) {
    const SpaceTimeGrid g{0.0, 1.0, 1000, 0.0, 1.0, 100, 1, true};
    const auto xi = sample_white_noise({42, g});
    const double n = static_cast<double>(g.size());
    double mean = 0.0, var = 0.0;
    for (double v : xi.values()) mean += v / n;
    for (double v : xi.values()) var += (v - mean) * (v - mean) / (n - 1);
    const double target = 1.0 / (g.dt() * g.dx());
    EXPECT_NEAR(var / target, 1.0, 0.03);
    EXPECT_LT(std::abs(mean), 3.0 * std::sqrt(target / n));
}

TEST(WhiteNoise, IsDeterministicPerSeed) {
    const SpaceTimeGrid g{0.0, 1.0, 20, 0.0, 1.0, 10, 1, true};
    const auto a = sample_white_noise({7, g}), b = sample_white_noise({7, g}), c = sample_white_noise({8, g});
    EXPECT_TRUE(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
    EXPECT_FALSE(std::equal(a.values().begin(), a.values().end(), c.values().begin()));
}

TEST(Parabolic, WithoutNonlinearityItIsTheHeatFlow) {
    const auto xi = sample_white_noise({1, kUnit});
    const auto u = solve_parabolic(Polynomial{}, Polynomial{}, bump(kUnit), xi, 1.0);
    const auto h = heat_Ic(bump(kUnit), kUnit, 1.0);
    for (std::size_t i = 0; i < kUnit.size(); i += 37) EXPECT_NEAR(u.values()[i], h.values()[i], 1e-14);
}

TEST(Parabolic, ZeroIsAFixedPoint) {
    const auto u = solve_parabolic(Polynomial{{0, 3, 0, -1}}, Polynomial{}, SpatialFunction(std::vector<double>(100, 0.0)),
                                   GridFunction(kUnit), 1.0);
    for (double v : u.values()) EXPECT_EQ(v, 0.0);
}

TEST(Parabolic, LinearDecayOfAConstant) {
    const auto u = solve_parabolic(Polynomial{{0, -1}}, Polynomial{}, SpatialFunction(std::vector<double>(100, 2.0)),
                                   GridFunction(kUnit), 1.0);
    for (int k : {0, 100, 1000})
        for (int i : {0, 50, 99}) EXPECT_NEAR(u(k, i), 2.0 * std::exp(-kUnit.t(k)), 2.0 * kUnit.dt() * kUnit.t(k) + 1e-13);
}

TEST(Parabolic, BlowupNamesTheStep) {
    const SpaceTimeGrid g{0.0, 1.0, 100, 0.0, 1.0, 10, 1, true};
    try {
        solve_parabolic(Polynomial{{0, 0, 0, 0, 0, 1}}, Polynomial{}, SpatialFunction(std::vector<double>(10, 50.0)),
                        GridFunction(g), 1.0);
        FAIL() << "expected blowup";
    } catch (const NumericalError& e) {
        EXPECT_GT(e.step(), 0);
    }
}

TEST(Wave, HomogeneousSolveMatchesTheInitialFlow) {
    const SpaceTimeGrid g{0.0, 1.0, 1000, 0.0, 1.0, 100, 1, true};
    std::vector<double> u0(100);
    for (int i = 0; i < 100; ++i) u0[static_cast<std::size_t>(i)] = std::sin(2 * kPi * g.x(i));
    const auto a = solve_wave(Nonlinearity::none(), SpatialFunction(u0), SpatialFunction(std::vector<double>(100, 0.0)),
                              GridFunction(g));
    const auto b = wave_Ic(SpatialFunction(u0), g);
    for (std::size_t i = 0; i < g.size(); i += 13) EXPECT_NEAR(a.values()[i], b.values()[i], 1e-12);
}

TEST(Wave, ZeroDataGivesZero) {
    const SpaceTimeGrid g{0.0, 1.0, 100, 0.0, 1.0, 50, 1, true};
    const SpatialFunction z(std::vector<double>(50, 0.0));
    for (const auto f = solve_wave(Nonlinearity::none(), z, z, GridFunction(g)); double v : f.values()) EXPECT_EQ(v, 0.0);
}

TEST(Wave, UnitForcingOfTheZeroMode) {
    const SpaceTimeGrid g{0.0, 1.0, 100, 0.0, 1.0, 50, 1, true};
    const SpatialFunction z(std::vector<double>(50, 0.0));
    const auto u = solve_wave(Nonlinearity{[](double) { return 0.0; }, [](double) { return 1.0; }}, z, z,
                              GridFunction::from_function(g, [](double, double) { return 1.0; }));
    for (int k = 0; k <= g.N; ++k) EXPECT_NEAR(u(k, 20), 0.5 * g.t(k) * g.t(k), 1e-12);
}

TEST(Wave, RejectsCflViolation) {
    const SpaceTimeGrid g{0.0, 1.0, 10, 0.0, 1.0, 50, 1, true};
    const SpatialFunction z(std::vector<double>(50, 0.0));
    EXPECT_THROW(solve_wave(Nonlinearity::none(), z, z, GridFunction(g)), ConfigError);
}

TEST(Burgers, ZeroAndConstantsAreSteady) {
    BurgersConfig cfg;
    cfg.fine = {0.0, 1.0, 200, -8.0, 8.0, 256, 1, true};
    cfg.coarse = {0.0, 1.0, 20, -8.0, 8.0, 128, 1, true};
    for (double c : {0.0, 0.8}) {
        const auto u = solve_burgers(SpatialFunction(std::vector<double>(256, c)), cfg);
        EXPECT_EQ(u.grid(), cfg.coarse);
        for (double v : u.values()) EXPECT_NEAR(v, c, 1e-13);
    }
}

TEST(Burgers, EnergyDoesNotIncrease) {
    BurgersConfig cfg;
    cfg.fine = {0.0, 10.0, 2000, -8.0, 8.0, 1024, 1, true};
    const auto xs = cfg.fine.xs();
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        const auto u = solve_burgers_full(sample_burgers_ic({seed, 4.0, 10}, xs), cfg);
        double prev = energy(u.row(0), cfg.fine.dx());
        for (int k = 1; k <= cfg.fine.N; ++k) {
            const double e = energy(u.row(k), cfg.fine.dx());
            EXPECT_LE(e, prev * (1 + 1e-12)) << "seed " << seed << " step " << k;
            prev = e;
        }
    }
}

TEST(Burgers, RefiningTheFineGridChangesLittle) {
    BurgersConfig a, b;
    a.fine = {0.0, 2.0, 400, -8.0, 8.0, 1024, 1, true};
    b.fine = {0.0, 2.0, 800, -8.0, 8.0, 2048, 1, true};
    a.coarse = b.coarse = {0.0, 2.0, 40, -8.0, 8.0, 512, 1, true};
    const BurgersICSpec ic{5, 8.0, 10};
    const auto ua = solve_burgers(sample_burgers_ic(ic, a.fine.xs()), a);
    const auto ub = solve_burgers(sample_burgers_ic(ic, b.fine.xs()), b);
    EXPECT_LT(rel_l2(ua, ub), 0.01);
}

TEST(BurgersIC, ZeroCoefficientsGiveZero) {
    const SpaceTimeGrid g{0.0, 1.0, 1, -8.0, 8.0, 64, 1, true};
    const std::vector<double> a(21, 0.0);
    for (const auto f = burgers_ic_from_coefficients(a, 8.0, g.xs()); double v : f.values()) EXPECT_EQ(v, 0.0);
}

TEST(BurgersIC, SymmetricPairGivesTheFirstSine) {
    const SpaceTimeGrid g{0.0, 1.0, 1, -8.0, 8.0, 64, 1, true};
    std::vector<double> a(21, 0.0);
    a[11] = 1.0;  // k = 1
    a[9] = -1.0;  // k = -1
    const auto xs = g.xs();
    const auto u = burgers_ic_from_coefficients(a, 8.0, xs);
    for (std::size_t i = 0; i < xs.size(); ++i) EXPECT_NEAR(u[i], std::sin(kPi * xs[i] / 8.0), 1e-14);
}

TEST(BurgersIC, ScalingSetsTheNumberOfCycles) {
    const SpaceTimeGrid g{0.0, 1.0, 1, -8.0, 8.0, 512, 1, true};
    const auto xs = g.xs();
    for (const auto& [lambda, cycles] : {std::pair{8.0, 1}, std::pair{4.0, 2}, std::pair{2.0, 4}}) {
        std::vector<double> a(21, 0.0);
        a[11] = 1.0;
        a[9] = -1.0;
        const auto u = burgers_ic_from_coefficients(a, lambda, xs);
        int crossings = 0, last = 0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (std::abs(u[i]) < 1e-9) continue;
            const int sign = u[i] > 0 ? 1 : -1;
            if (last != 0 && sign != last) ++crossings;
            last = sign;
        }
        // sin over `cycles` periods changes sign at the interior zeros x = m * lambda
        EXPECT_EQ(crossings, 2 * cycles - 1) << "lambda " << lambda;
    }
}

TEST(BurgersIC, IsReproducibleFromTheSeed) {
    const SpaceTimeGrid g{0.0, 1.0, 1, -8.0, 8.0, 128, 1, true};
    const auto a = sample_burgers_ic({99, 4.0, 10}, g.xs());
    const auto b = sample_burgers_ic({99, 4.0, 10}, g.xs());
    const auto c = sample_burgers_ic({100, 4.0, 10}, g.xs());
    EXPECT_TRUE(std::equal(a.values().begin(), a.values().end(), b.values().begin()));
    EXPECT_FALSE(std::equal(a.values().begin(), a.values().end(), c.values().begin()));
    EXPECT_EQ(burgers_ic_coefficients({99, 4.0, 10}).size(), 21u);
}
