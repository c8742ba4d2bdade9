#pragma once

#include <memory>
#include <span>
#include <vector>

#include "rsf/grid.hpp"

namespace rsf {

// Solves (diag*I + off*(S + S^T)) x = r on a periodic ring, S the cyclic shift.
class PeriodicTridiagonal {
public:
    PeriodicTridiagonal(int n, double diag, double off);
    void solve(std::span<double> rhs) const;
    int size() const { return n_; }

private:
    int n_;
    double diag_, off_;
    std::vector<double> cp_, inv_den_, z_;
    double gamma_ = 0.0, vz_ = 0.0;
    void thomas(std::span<double> r) const;
};

enum class OperatorKind { Heat, Wave, TimeIntegral };
enum class Quadrature { LeftPoint, Trapezoid };

class OperatorBundle {
public:
    // An unconfigured bundle; use one of the factories below before applying it.
    OperatorBundle() = default;

    static OperatorBundle heat(const SpaceTimeGrid& g, double nu);
    static OperatorBundle wave(const SpaceTimeGrid& g);
    static OperatorBundle time_integral(const SpaceTimeGrid& g, Quadrature q = Quadrature::Trapezoid);

    OperatorKind kind() const { return kind_; }
    const SpaceTimeGrid& grid() const { return grid_; }
    double nu() const { return nu_; }
    Quadrature quadrature() const { return quad_; }

    // I[f] with zero initial data.
    GridFunction apply(const GridFunction& f) const;
    // I_c[g]: homogeneous flow started from g (zero initial speed for the wave kind).
    GridFunction initial_flow(std::span<const double> g) const;
    // I_s[v]: homogeneous wave flow from zero position with initial speed v.
    GridFunction speed_flow(std::span<const double> v) const;

    bool configured() const { return configured_; }

private:
    bool configured_ = false;
    OperatorKind kind_ = OperatorKind::TimeIntegral;
    SpaceTimeGrid grid_;
    double nu_ = 0.0;
    Quadrature quad_ = Quadrature::Trapezoid;
    std::shared_ptr<const PeriodicTridiagonal> implicit_;
};

GridFunction heat_I(const GridFunction& f, double nu);
GridFunction heat_Ic(const SpatialFunction& g, const SpaceTimeGrid& grid, double nu);
GridFunction wave_I(const GridFunction& f);
GridFunction wave_Ic(const SpatialFunction& u0, const SpaceTimeGrid& grid);
GridFunction wave_Is(const SpatialFunction& v0, const SpaceTimeGrid& grid);
GridFunction time_integral_I(const GridFunction& f, Quadrature q = Quadrature::Trapezoid);

// Throws ConfigError when dt > dx.
void check_cfl(const SpaceTimeGrid& g);

}  // namespace rsf
