#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "rsf/grid.hpp"

namespace rsf {

struct Polynomial {
    std::vector<double> coeffs;  // coeffs[k] multiplies u^k

    double operator()(double u) const;
    bool is_zero() const;
};

// Right-hand side drift(u) + multiplier(u) * xi of the forced equations.
struct Nonlinearity {
    std::function<double(double)> drift;
    std::function<double(double)> multiplier;

    static Nonlinearity none();
    static Nonlinearity polynomial(Polynomial mu, Polynomial sigma);
    // cos(pi u) + u^2 + u xi
    static Nonlinearity wave_default();
};

struct NoiseSpec {
    std::uint64_t seed = 0;
    SpaceTimeGrid grid;
};

// i.i.d. N(0, 1/(dt*dx)) per grid point (1/dt on d = 0 grids).
GridFunction sample_white_noise(const NoiseSpec& spec);

// Semi-implicit: (1 - nu dt Lap) u_{k+1} = u_k + dt (mu(u_k) + sigma(u_k) xi_k).
GridFunction solve_parabolic(const Nonlinearity& f, const SpatialFunction& u0, const GridFunction& xi, double nu);
GridFunction solve_parabolic(const Polynomial& mu, const Polynomial& sigma, const SpatialFunction& u0,
                             const GridFunction& xi, double nu);

// Leapfrog for u_tt - Lap u = drift(u) + multiplier(u) xi.
GridFunction solve_wave(const Nonlinearity& f, const SpatialFunction& u0, const SpatialFunction& v0,
                        const GridFunction& xi);

struct BurgersConfig {
    double nu = 0.1;
    SpaceTimeGrid fine{0.0, 10.0, 2000, -8.0, 8.0, 1024, 1, true};
    SpaceTimeGrid coarse{0.0, 10.0, 200, -8.0, 8.0, 512, 1, true};
};

// Solves u_t - nu u_xx = -u u_x on cfg.fine (diffusion implicit, advection explicit) and restricts to cfg.coarse.
// u0 lives on the fine spatial grid.
GridFunction solve_burgers(const SpatialFunction& u0, const BurgersConfig& cfg = {});
GridFunction solve_burgers_full(const SpatialFunction& u0, const BurgersConfig& cfg = {});

struct BurgersICSpec {
    std::uint64_t seed = 0;
    double lambda = 8.0;
    int K = 10;
};

// sum_{k=-K..K} a_k / (1 + k^2) sin(pi k x / lambda) with a_k ~ N(0, 1).
SpatialFunction sample_burgers_ic(const BurgersICSpec& spec, std::span<const double> xs);
SpatialFunction burgers_ic_from_coefficients(std::span<const double> a, double lambda, std::span<const double> xs);
std::vector<double> burgers_ic_coefficients(const BurgersICSpec& spec);

}  // namespace rsf
