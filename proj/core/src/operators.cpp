#include "rsf/operators.hpp"

#include <algorithm>
#include <cmath>

#include "rsf/error.hpp"

namespace rsf {

PeriodicTridiagonal::PeriodicTridiagonal(int n, double diag, double off) : n_(n), diag_(diag), off_(off) {
    if (n < 1) throw ConfigError("tridiagonal system needs at least one unknown");
    if (n < 3) return;
    // Sherman-Morrison: A = B + u v^T with u = (gamma, 0, .., off), v = (1, 0, .., off/gamma).
    gamma_ = -diag;
    const auto un = static_cast<std::size_t>(n);
    cp_.resize(un);
    inv_den_.resize(un);
    auto d = [&](std::size_t i) {
        if (i == 0) return diag - gamma_;
        if (i + 1 == un) return diag - off * off / gamma_;
        return diag;
    };
    inv_den_[0] = 1.0 / d(0);
    cp_[0] = off * inv_den_[0];
    for (std::size_t i = 1; i < un; ++i) {
        const double den = d(i) - off * cp_[i - 1];
        if (den == 0.0) throw NumericalError("singular periodic tridiagonal system");
        inv_den_[i] = 1.0 / den;
        cp_[i] = off * inv_den_[i];
    }
    z_.assign(un, 0.0);
    z_[0] = gamma_;
    z_[un - 1] = off;
    thomas(z_);
    vz_ = z_[0] + off / gamma_ * z_[un - 1];
}

void PeriodicTridiagonal::thomas(std::span<double> r) const {
    const auto un = static_cast<std::size_t>(n_);
    r[0] *= inv_den_[0];
    for (std::size_t i = 1; i < un; ++i) r[i] = (r[i] - off_ * r[i - 1]) * inv_den_[i];
    for (std::size_t i = un - 1; i-- > 0;) r[i] -= cp_[i] * r[i + 1];
}

void PeriodicTridiagonal::solve(std::span<double> r) const {
    if (static_cast<int>(r.size()) != n_) throw ConfigError("tridiagonal solve: size mismatch");
    if (n_ == 1) {
        r[0] /= diag_ + 2.0 * off_;
        return;
    }
    if (n_ == 2) {
        const double a = diag_, b = 2.0 * off_;
        const double det = a * a - b * b;
        const double x0 = (a * r[0] - b * r[1]) / det;
        const double x1 = (a * r[1] - b * r[0]) / det;
        r[0] = x0;
        r[1] = x1;
        return;
    }
    thomas(r);
    const auto un = static_cast<std::size_t>(n_);
    const double vy = r[0] + off_ / gamma_ * r[un - 1];
    const double s = vy / (1.0 + vz_);
    for (std::size_t i = 0; i < un; ++i) r[i] -= s * z_[i];
}

namespace {

void check_row(std::span<const double> row, int step, const char* what) {
    for (double v : row)
        if (!std::isfinite(v)) throw NumericalError(std::string(what) + " produced a non-finite value", step);
}

void require_spatial(const SpaceTimeGrid& g, const char* what) {
    g.validate();
    if (g.d != 1) throw ConfigError(std::string(what) + " needs a one-dimensional periodic grid");
}

void laplacian_add(std::span<const double> w, std::span<double> out, double scale, double dx) {
    const std::size_t n = w.size();
    const double s = scale / (dx * dx);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = w[i + 1 == n ? 0 : i + 1];
        const double l = w[i == 0 ? n - 1 : i - 1];
        out[i] += s * (r - 2.0 * w[i] + l);
    }
}

}  // namespace

void check_cfl(const SpaceTimeGrid& g) {
    if (g.dt() > g.dx() * (1.0 + 1e-12))
        throw ConfigError("wave step violates the CFL condition dt <= dx (dt = " + std::to_string(g.dt()) +
                          ", dx = " + std::to_string(g.dx()) + ")");
}

OperatorBundle OperatorBundle::heat(const SpaceTimeGrid& g, double nu) {
    require_spatial(g, "heat operator");
    if (!(nu > 0.0)) throw ConfigError("heat operator needs a positive viscosity");
    OperatorBundle b;
    b.kind_ = OperatorKind::Heat;
    b.configured_ = true;
    b.grid_ = g;
    b.nu_ = nu;
    const double r = nu * g.dt() / (g.dx() * g.dx());
    b.implicit_ = std::make_shared<PeriodicTridiagonal>(g.nx, 1.0 + 2.0 * r, -r);
    return b;
}

OperatorBundle OperatorBundle::wave(const SpaceTimeGrid& g) {
    require_spatial(g, "wave operator");
    check_cfl(g);
    OperatorBundle b;
    b.kind_ = OperatorKind::Wave;
    b.configured_ = true;
    b.grid_ = g;
    return b;
}

OperatorBundle OperatorBundle::time_integral(const SpaceTimeGrid& g, Quadrature q) {
    g.validate();
    if (g.d != 0) throw ConfigError("time-integral operator needs a d = 0 grid");
    OperatorBundle b;
    b.kind_ = OperatorKind::TimeIntegral;
    b.configured_ = true;
    b.grid_ = g;
    b.quad_ = q;
    return b;
}

GridFunction OperatorBundle::apply(const GridFunction& f) const {
    if (!configured_) throw ConfigError("operator bundle is not configured");
    if (!(f.grid() == grid_)) throw ConfigError("operator grid does not match its input");
    GridFunction out(grid_);
    const int N = grid_.N;
    const double dt = grid_.dt();
    switch (kind_) {
    case OperatorKind::Heat:
        for (int k = 0; k < N; ++k) {
            auto next = out.row(k + 1);
            auto prev = out.row(k);
            auto src = f.row(k);
            for (std::size_t i = 0; i < next.size(); ++i) next[i] = prev[i] + dt * src[i];
            implicit_->solve(next);
            check_row(next, k + 1, "heat operator");
        }
        break;
    case OperatorKind::Wave: {
        const double h2 = dt * dt;
        {
            auto w1 = out.row(1);
            auto f0 = f.row(0);
            for (std::size_t i = 0; i < w1.size(); ++i) w1[i] = 0.5 * h2 * f0[i];
        }
        for (int k = 1; k < N; ++k) {
            auto next = out.row(k + 1);
            auto cur = out.row(k);
            auto prev = out.row(k - 1);
            auto src = f.row(k);
            for (std::size_t i = 0; i < next.size(); ++i) next[i] = 2.0 * cur[i] - prev[i] + h2 * src[i];
            laplacian_add(cur, next, h2, grid_.dx());
            check_row(next, k + 1, "wave operator");
        }
        break;
    }
    case OperatorKind::TimeIntegral:
        for (int k = 0; k < N; ++k) {
            auto next = out.row(k + 1);
            auto prev = out.row(k);
            auto a = f.row(k);
            auto b = f.row(k + 1);
            if (quad_ == Quadrature::LeftPoint) {
                for (std::size_t i = 0; i < next.size(); ++i) next[i] = prev[i] + dt * a[i];
            } else {
                for (std::size_t i = 0; i < next.size(); ++i) next[i] = prev[i] + 0.5 * dt * (a[i] + b[i]);
            }
        }
        break;
    }
    return out;
}

GridFunction OperatorBundle::initial_flow(std::span<const double> g) const {
    if (!configured_) throw ConfigError("operator bundle is not configured");
    if (g.size() != static_cast<std::size_t>(grid_.nx)) throw ConfigError("initial data length does not match grid");
    GridFunction out(grid_);
    std::copy(g.begin(), g.end(), out.row(0).begin());
    check_row(out.row(0), 0, "initial data");
    switch (kind_) {
    case OperatorKind::Heat:
        for (int k = 0; k < grid_.N; ++k) {
            auto next = out.row(k + 1);
            auto prev = out.row(k);
            std::copy(prev.begin(), prev.end(), next.begin());
            implicit_->solve(next);
            check_row(next, k + 1, "heat flow");
        }
        break;
    case OperatorKind::Wave: {
        const double h2 = grid_.dt() * grid_.dt();
        {
            auto w1 = out.row(1);
            std::copy(g.begin(), g.end(), w1.begin());
            laplacian_add(g, w1, 0.5 * h2, grid_.dx());
        }
        for (int k = 1; k < grid_.N; ++k) {
            auto next = out.row(k + 1);
            auto cur = out.row(k);
            auto prev = out.row(k - 1);
            for (std::size_t i = 0; i < next.size(); ++i) next[i] = 2.0 * cur[i] - prev[i];
            laplacian_add(cur, next, h2, grid_.dx());
            check_row(next, k + 1, "wave flow");
        }
        break;
    }
    case OperatorKind::TimeIntegral:
        for (int k = 1; k <= grid_.N; ++k) std::copy(g.begin(), g.end(), out.row(k).begin());
        break;
    }
    return out;
}

GridFunction OperatorBundle::speed_flow(std::span<const double> v) const {
    if (kind_ != OperatorKind::Wave) throw ConfigError("initial-speed flow is only defined for the wave operator");
    if (v.size() != static_cast<std::size_t>(grid_.nx)) throw ConfigError("initial speed length does not match grid");
    GridFunction out(grid_);
    const double dt = grid_.dt();
    const double h2 = dt * dt;
    {
        auto w1 = out.row(1);
        for (std::size_t i = 0; i < w1.size(); ++i) w1[i] = dt * v[i];
        check_row(w1, 1, "wave speed flow");
    }
    for (int k = 1; k < grid_.N; ++k) {
        auto next = out.row(k + 1);
        auto cur = out.row(k);
        auto prev = out.row(k - 1);
        for (std::size_t i = 0; i < next.size(); ++i) next[i] = 2.0 * cur[i] - prev[i];
        laplacian_add(cur, next, h2, grid_.dx());
        check_row(next, k + 1, "wave speed flow");
    }
    return out;
}

GridFunction heat_I(const GridFunction& f, double nu) { return OperatorBundle::heat(f.grid(), nu).apply(f); }

GridFunction heat_Ic(const SpatialFunction& g, const SpaceTimeGrid& grid, double nu) {
    return OperatorBundle::heat(grid, nu).initial_flow(g.values());
}

GridFunction wave_I(const GridFunction& f) { return OperatorBundle::wave(f.grid()).apply(f); }

GridFunction wave_Ic(const SpatialFunction& u0, const SpaceTimeGrid& grid) {
    return OperatorBundle::wave(grid).initial_flow(u0.values());
}

GridFunction wave_Is(const SpatialFunction& v0, const SpaceTimeGrid& grid) {
    return OperatorBundle::wave(grid).speed_flow(v0.values());
}

GridFunction time_integral_I(const GridFunction& f, Quadrature q) {
    return OperatorBundle::time_integral(f.grid(), q).apply(f);
}

}  // namespace rsf
