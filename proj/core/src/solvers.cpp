#include "rsf/solvers.hpp"

#include <cmath>
#include <numbers>

#include "rsf/error.hpp"
#include "rsf/operators.hpp"
#include "rsf/random.hpp"

namespace rsf {

namespace {

constexpr std::uint64_t kNoiseStream = 1;
constexpr std::uint64_t kBurgersStream = 2;

void check_row(std::span<const double> row, int step, const char* what) {
    for (double v : row)
        if (!std::isfinite(v)) throw NumericalError(std::string(what) + " blew up", step);
}

}  // namespace

double Polynomial::operator()(double u) const {
    double r = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) r = r * u + *it;
    return r;
}

bool Polynomial::is_zero() const {
    for (double c : coeffs)
        if (c != 0.0) return false;
    return true;
}

Nonlinearity Nonlinearity::none() {
    return {[](double) { return 0.0; }, [](double) { return 0.0; }};
}

Nonlinearity Nonlinearity::polynomial(Polynomial mu, Polynomial sigma) {
    return {[mu = std::move(mu)](double u) { return mu(u); }, [sigma = std::move(sigma)](double u) { return sigma(u); }};
}

Nonlinearity Nonlinearity::wave_default() {
    return {[](double u) { return std::cos(std::numbers::pi * u) + u * u; }, [](double u) { return u; }};
}

GridFunction sample_white_noise(const NoiseSpec& spec) {
    const auto& g = spec.grid;
    g.validate();
    const double cell = g.d == 0 ? g.dt() : g.dt() * g.dx();
    std::vector<double> v(g.size());
    Philox rng(spec.seed, kNoiseStream);
    rng.fill_normal(v, 1.0 / std::sqrt(cell));
    return GridFunction(g, std::move(v));
}

GridFunction solve_parabolic(const Nonlinearity& f, const SpatialFunction& u0, const GridFunction& xi, double nu) {
    const auto& g = xi.grid();
    if (u0.size() != static_cast<std::size_t>(g.nx)) throw ConfigError("initial condition does not match the grid");
    if (g.d != 1) throw ConfigError("parabolic solver needs a one-dimensional grid");
    if (!(nu > 0.0)) throw ConfigError("parabolic solver needs a positive viscosity");
    const double dt = g.dt();
    const double r = nu * dt / (g.dx() * g.dx());
    PeriodicTridiagonal implicit(g.nx, 1.0 + 2.0 * r, -r);
    GridFunction u(g);
    std::copy(u0.values().begin(), u0.values().end(), u.row(0).begin());
    for (int k = 0; k < g.N; ++k) {
        auto cur = u.row(k);
        auto next = u.row(k + 1);
        auto x = xi.row(k);
        for (std::size_t i = 0; i < next.size(); ++i)
            next[i] = cur[i] + dt * (f.drift(cur[i]) + f.multiplier(cur[i]) * x[i]);
        implicit.solve(next);
        check_row(next, k + 1, "parabolic solver");
    }
    return u;
}

GridFunction solve_parabolic(const Polynomial& mu, const Polynomial& sigma, const SpatialFunction& u0,
                             const GridFunction& xi, double nu) {
    return solve_parabolic(Nonlinearity::polynomial(mu, sigma), u0, xi, nu);
}

GridFunction solve_wave(const Nonlinearity& f, const SpatialFunction& u0, const SpatialFunction& v0,
                        const GridFunction& xi) {
    const auto& g = xi.grid();
    g.validate();
    if (g.d != 1) throw ConfigError("wave solver needs a one-dimensional grid");
    check_cfl(g);
    const auto n = static_cast<std::size_t>(g.nx);
    if (u0.size() != n || v0.size() != n) throw ConfigError("initial data does not match the grid");
    const double dt = g.dt();
    const double h2 = dt * dt;
    const double ix2 = 1.0 / (g.dx() * g.dx());
    auto lap = [&](std::span<const double> w, std::size_t i) {
        const double r = w[i + 1 == n ? 0 : i + 1];
        const double l = w[i == 0 ? n - 1 : i - 1];
        return (r - 2.0 * w[i] + l) * ix2;
    };
    GridFunction u(g);
    std::copy(u0.values().begin(), u0.values().end(), u.row(0).begin());
    {
        auto w0 = u.row(0);
        auto w1 = u.row(1);
        auto x = xi.row(0);
        for (std::size_t i = 0; i < n; ++i)
            w1[i] = w0[i] + dt * v0[i] + 0.5 * h2 * (lap(w0, i) + f.drift(w0[i]) + f.multiplier(w0[i]) * x[i]);
        check_row(w1, 1, "wave solver");
    }
    for (int k = 1; k < g.N; ++k) {
        auto prev = u.row(k - 1);
        auto cur = u.row(k);
        auto next = u.row(k + 1);
        auto x = xi.row(k);
        for (std::size_t i = 0; i < n; ++i)
            next[i] = 2.0 * cur[i] - prev[i] + h2 * (lap(cur, i) + f.drift(cur[i]) + f.multiplier(cur[i]) * x[i]);
        check_row(next, k + 1, "wave solver");
    }
    return u;
}

GridFunction solve_burgers_full(const SpatialFunction& u0, const BurgersConfig& cfg) {
    const auto& g = cfg.fine;
    g.validate();
    if (g.d != 1) throw ConfigError("Burgers solver needs a one-dimensional grid");
    if (!(cfg.nu > 0.0)) throw ConfigError("Burgers viscosity must be positive");
    if (u0.size() != static_cast<std::size_t>(g.nx)) throw ConfigError("initial condition does not match the fine grid");
    const double dt = g.dt();
    const double r = cfg.nu * dt / (g.dx() * g.dx());
    PeriodicTridiagonal implicit(g.nx, 1.0 + 2.0 * r, -r);
    GridFunction u(g);
    std::copy(u0.values().begin(), u0.values().end(), u.row(0).begin());
    std::vector<double> ux(static_cast<std::size_t>(g.nx));
    for (int k = 0; k < g.N; ++k) {
        auto cur = u.row(k);
        auto next = u.row(k + 1);
        central_d1(cur, ux, g.dx());
        for (std::size_t i = 0; i < next.size(); ++i) next[i] = cur[i] - dt * cur[i] * ux[i];
        implicit.solve(next);
        check_row(next, k + 1, "Burgers solver");
    }
    return u;
}

GridFunction solve_burgers(const SpatialFunction& u0, const BurgersConfig& cfg) {
    return downsample(solve_burgers_full(u0, cfg), cfg.coarse);
}

std::vector<double> burgers_ic_coefficients(const BurgersICSpec& spec) {
    if (spec.K < 0) throw ConfigError("Burgers mode cutoff must be non-negative");
    std::vector<double> a(static_cast<std::size_t>(2 * spec.K + 1));
    Philox rng(spec.seed, kBurgersStream);
    rng.fill_normal(a);
    return a;
}

SpatialFunction burgers_ic_from_coefficients(std::span<const double> a, double lambda, std::span<const double> xs) {
    if (a.size() % 2 != 1) throw ConfigError("Burgers coefficients must cover k = -K..K");
    if (!(lambda > 0.0)) throw ConfigError("Burgers scaling lambda must be positive");
    const int K = static_cast<int>(a.size() / 2);
    std::vector<double> u(xs.size(), 0.0);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double s = 0.0;
        for (int k = -K; k <= K; ++k)
            s += a[static_cast<std::size_t>(k + K)] / (1.0 + k * k) * std::sin(std::numbers::pi * k * xs[i] / lambda);
        u[i] = s;
    }
    return SpatialFunction(std::move(u));
}

SpatialFunction sample_burgers_ic(const BurgersICSpec& spec, std::span<const double> xs) {
    return burgers_ic_from_coefficients(burgers_ic_coefficients(spec), spec.lambda, xs);
}

}  // namespace rsf
