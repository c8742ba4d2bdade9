#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rsf/symbols.hpp"

namespace rsf {

// Times t_k = t0 + k*dt for k = 0..N; space points x_i = x_min + i*dx on [x_min, x_max).
// With d = 0 there is no spatial coupling and the columns are independent channels.
struct SpaceTimeGrid {
    double t0 = 0.0;
    double T = 1.0;
    int N = 1;
    double x_min = 0.0;
    double x_max = 1.0;
    int nx = 1;
    int d = 1;
    bool periodic = true;

    void validate() const;
    int nt() const { return N + 1; }
    double dt() const { return (T - t0) / N; }
    double dx() const { return (x_max - x_min) / nx; }
    double length() const { return x_max - x_min; }
    double t(int k) const { return t0 + k * dt(); }
    double x(int i) const { return x_min + i * dx(); }
    std::vector<double> xs() const;
    std::size_t size() const { return static_cast<std::size_t>(nt()) * static_cast<std::size_t>(nx); }

    bool operator==(const SpaceTimeGrid&) const = default;
};

// Same spatial layout, time axis replaced by [0, dt] with `steps` steps.
SpaceTimeGrid substep_grid(const SpaceTimeGrid& g, int steps);

class SpatialFunction {
public:
    SpatialFunction() = default;
    explicit SpatialFunction(std::vector<double> values);

    std::size_t size() const { return v_.size(); }
    double operator[](std::size_t i) const { return v_[i]; }
    std::span<const double> values() const { return v_; }
    const std::vector<double>& vector() const { return v_; }

private:
    std::vector<double> v_;
};

class GridFunction {
public:
    GridFunction() = default;
    explicit GridFunction(const SpaceTimeGrid& g);
    GridFunction(const SpaceTimeGrid& g, std::vector<double> values);

    static GridFunction from_function(const SpaceTimeGrid& g, const std::function<double(double, double)>& f);
    // Every time row equal to `row`.
    static GridFunction constant_in_time(const SpaceTimeGrid& g, std::span<const double> row);

    const SpaceTimeGrid& grid() const { return grid_; }
    int nt() const { return grid_.nt(); }
    int nx() const { return grid_.nx; }

    double operator()(int k, int i) const { return v_[static_cast<std::size_t>(k) * grid_.nx + i]; }
    double& operator()(int k, int i) { return v_[static_cast<std::size_t>(k) * grid_.nx + i]; }
    std::span<const double> row(int k) const {
        return {v_.data() + static_cast<std::size_t>(k) * grid_.nx, static_cast<std::size_t>(grid_.nx)};
    }
    std::span<double> row(int k) {
        return {v_.data() + static_cast<std::size_t>(k) * grid_.nx, static_cast<std::size_t>(grid_.nx)};
    }
    std::span<const double> values() const { return v_; }
    std::span<double> values() { return v_; }

    SpatialFunction slice(int k) const;
    // Throws NumericalError naming the first time row with a non-finite value.
    void check_finite() const;

private:
    SpaceTimeGrid grid_;
    std::vector<double> v_;
};

// Periodic central differences on one row.
void central_d1(std::span<const double> in, std::span<double> out, double dx);
void central_d2(std::span<const double> in, std::span<double> out, double dx);

GridFunction space_derivative(const GridFunction& f, const MultiIndex& a);

double rel_l2(std::span<const double> pred, std::span<const double> truth);
double rel_l2(const GridFunction& pred, const GridFunction& truth);
double mean_abs_norm(const GridFunction& f);

GridFunction downsample(const GridFunction& f, const SpaceTimeGrid& target);

void write_csv(const GridFunction& f, const std::string& path);
GridFunction read_csv(const std::string& path);
void write_binary(const GridFunction& f, const std::string& path);
GridFunction read_binary(const std::string& path);

}  // namespace rsf
