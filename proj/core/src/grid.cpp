#include "rsf/grid.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "rsf/error.hpp"

namespace rsf {

void SpaceTimeGrid::validate() const {
    if (N < 1) throw ConfigError("grid needs at least one time step");
    if (!(T > t0)) throw ConfigError("grid end time must exceed start time");
    if (nx < 1) throw ConfigError("grid needs at least one spatial point");
    if (d < 0 || d > 1) throw ConfigError("only spatial dimension 0 or 1 is supported");
    if (d == 1 && !(x_max > x_min)) throw ConfigError("grid spatial domain is empty");
    if (d == 1 && !periodic) throw ConfigError("only periodic boundaries are supported");
}

std::vector<double> SpaceTimeGrid::xs() const {
    std::vector<double> out(static_cast<std::size_t>(nx));
    for (int i = 0; i < nx; ++i) out[static_cast<std::size_t>(i)] = x(i);
    return out;
}

SpaceTimeGrid substep_grid(const SpaceTimeGrid& g, int steps) {
    if (steps < 1) throw ConfigError("substep count must be at least 1");
    SpaceTimeGrid s = g;
    s.t0 = 0.0;
    s.T = g.dt();
    s.N = steps;
    return s;
}

SpatialFunction::SpatialFunction(std::vector<double> values) : v_(std::move(values)) {
    for (std::size_t i = 0; i < v_.size(); ++i)
        if (!std::isfinite(v_[i]))
            throw NumericalError("spatial function has a non-finite value at index " + std::to_string(i));
}

GridFunction::GridFunction(const SpaceTimeGrid& g) : grid_(g), v_(g.size(), 0.0) { g.validate(); }

GridFunction::GridFunction(const SpaceTimeGrid& g, std::vector<double> values) : grid_(g), v_(std::move(values)) {
    g.validate();
    if (v_.size() != g.size())
        throw ConfigError("grid function has " + std::to_string(v_.size()) + " values but the grid has " +
                          std::to_string(g.size()) + " points");
    check_finite();
}

GridFunction GridFunction::from_function(const SpaceTimeGrid& g, const std::function<double(double, double)>& f) {
    GridFunction out(g);
    for (int k = 0; k < g.nt(); ++k)
        for (int i = 0; i < g.nx; ++i) out(k, i) = f(g.t(k), g.x(i));
    out.check_finite();
    return out;
}

GridFunction GridFunction::constant_in_time(const SpaceTimeGrid& g, std::span<const double> row) {
    if (row.size() != static_cast<std::size_t>(g.nx)) throw ConfigError("row length does not match grid");
    GridFunction out(g);
    for (int k = 0; k < g.nt(); ++k) std::copy(row.begin(), row.end(), out.row(k).begin());
    out.check_finite();
    return out;
}

SpatialFunction GridFunction::slice(int k) const {
    if (k < 0 || k >= nt()) throw ConfigError("time index out of range");
    auto r = row(k);
    return SpatialFunction(std::vector<double>(r.begin(), r.end()));
}

void GridFunction::check_finite() const {
    for (std::size_t i = 0; i < v_.size(); ++i)
        if (!std::isfinite(v_[i]))
            throw NumericalError("non-finite value in grid function", static_cast<long>(i / grid_.nx));
}

void central_d1(std::span<const double> in, std::span<double> out, double dx) {
    const std::size_t n = in.size();
    const double s = 1.0 / (2.0 * dx);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = in[i + 1 == n ? 0 : i + 1];
        const double l = in[i == 0 ? n - 1 : i - 1];
        out[i] = (r - l) * s;
    }
}

void central_d2(std::span<const double> in, std::span<double> out, double dx) {
    const std::size_t n = in.size();
    const double s = 1.0 / (dx * dx);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = in[i + 1 == n ? 0 : i + 1];
        const double l = in[i == 0 ? n - 1 : i - 1];
        out[i] = (r - 2.0 * in[i] + l) * s;
    }
}

GridFunction space_derivative(const GridFunction& f, const MultiIndex& a) {
    const int order = a.order();
    if (order == 0) return f;
    const auto& g = f.grid();
    if (g.d == 0) throw ConfigError("no spatial derivatives on a d = 0 grid");
    if (a.dim() != 1) throw ConfigError("multi-index dimension does not match the grid");
    if (order > 2) throw ConfigError("spatial derivatives of order " + std::to_string(order) + " are not supported");
    GridFunction out(g);
    for (int k = 0; k < f.nt(); ++k) {
        if (order == 1) central_d1(f.row(k), out.row(k), g.dx());
        else central_d2(f.row(k), out.row(k), g.dx());
    }
    return out;
}

double rel_l2(std::span<const double> pred, std::span<const double> truth) {
    if (pred.size() != truth.size()) throw ConfigError("rel_l2: size mismatch");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const double e = pred[i] - truth[i];
        num += e * e;
        den += truth[i] * truth[i];
    }
    if (den == 0.0) throw ConfigError("rel_l2: truth has zero norm");
    return std::sqrt(num / den);
}

double rel_l2(const GridFunction& pred, const GridFunction& truth) {
    if (!(pred.grid() == truth.grid())) throw ConfigError("rel_l2: grids differ");
    return rel_l2(pred.values(), truth.values());
}

double mean_abs_norm(const GridFunction& f) {
    double s = 0.0;
    for (double v : f.values()) s += std::abs(v);
    return f.values().empty() ? 0.0 : s / static_cast<double>(f.values().size());
}

namespace {

int stride_of(double coarse_step, double fine_step, int coarse_count, int fine_count, const char* axis) {
    const double r = coarse_step / fine_step;
    const long s = std::lround(r);
    if (s < 1 || std::abs(r - static_cast<double>(s)) > 1e-9 * r)
        throw ConfigError(std::string("downsample: ") + axis + " points are not nested");
    if (static_cast<long>(coarse_count - 1) * s > fine_count - 1)
        throw ConfigError(std::string("downsample: ") + axis + " range exceeds the source grid");
    return static_cast<int>(s);
}

bool close(double a, double b, double scale) { return std::abs(a - b) <= 1e-9 * std::max(1.0, scale); }

}  // namespace

GridFunction downsample(const GridFunction& f, const SpaceTimeGrid& target) {
    const auto& src = f.grid();
    target.validate();
    if (src.d != target.d) throw ConfigError("downsample: dimension mismatch");
    const double tscale = std::abs(src.T) + std::abs(src.t0);
    const double xscale = std::abs(src.x_max) + std::abs(src.x_min);
    if (!close(src.t0, target.t0, tscale) || !close(src.T, target.T, tscale))
        throw ConfigError("downsample: time ranges differ");
    if (!close(src.x_min, target.x_min, xscale) || !close(src.x_max, target.x_max, xscale))
        throw ConfigError("downsample: spatial domains differ");
    const int st = stride_of(target.dt(), src.dt(), target.nt(), src.nt(), "time");
    const int sx = target.d == 0 ? 1 : stride_of(target.dx(), src.dx(), target.nx, src.nx, "space");
    if (target.d == 0 && target.nx != src.nx) throw ConfigError("downsample: channel counts differ");
    if (static_cast<long>(target.N) * st != src.N || static_cast<long>(target.nx) * sx != src.nx)
        throw ConfigError("downsample: grids are not nested");
    GridFunction out(target);
    for (int k = 0; k < target.nt(); ++k)
        for (int i = 0; i < target.nx; ++i) out(k, i) = f(k * st, i * sx);
    return out;
}

namespace {

std::string grid_header(const SpaceTimeGrid& g) {
    std::ostringstream os;
    os << std::setprecision(17) << "# rsf-grid t0=" << g.t0 << " T=" << g.T << " N=" << g.N << " x_min=" << g.x_min
       << " x_max=" << g.x_max << " nx=" << g.nx << " d=" << g.d << " periodic=" << (g.periodic ? 1 : 0);
    return os.str();
}

SpaceTimeGrid parse_header(const std::string& line) {
    if (line.rfind("# rsf-grid", 0) != 0) throw IoError("csv: missing grid header line");
    SpaceTimeGrid g;
    std::istringstream is(line.substr(10));
    std::string tok;
    while (is >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        const std::string k = tok.substr(0, eq);
        const std::string v = tok.substr(eq + 1);
        if (k == "t0") g.t0 = std::stod(v);
        else if (k == "T") g.T = std::stod(v);
        else if (k == "N") g.N = std::stoi(v);
        else if (k == "x_min") g.x_min = std::stod(v);
        else if (k == "x_max") g.x_max = std::stod(v);
        else if (k == "nx") g.nx = std::stoi(v);
        else if (k == "d") g.d = std::stoi(v);
        else if (k == "periodic") g.periodic = v == "1";
    }
    g.validate();
    return g;
}

template <class T>
void put(std::ostream& os, T v) {
    if constexpr (std::endian::native == std::endian::big) {
        unsigned char b[sizeof(T)];
        std::memcpy(b, &v, sizeof(T));
        std::reverse(b, b + sizeof(T));
        os.write(reinterpret_cast<const char*>(b), sizeof(T));
    } else {
        os.write(reinterpret_cast<const char*>(&v), sizeof(T));
    }
}

template <class T>
T get(std::istream& is) {
    unsigned char b[sizeof(T)];
    if (!is.read(reinterpret_cast<char*>(b), sizeof(T))) throw IoError("binary grid function: truncated file");
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    T v;
    std::memcpy(&v, b, sizeof(T));
    return v;
}

constexpr char kMagic[4] = {'R', 'S', 'G', 'F'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

void write_csv(const GridFunction& f, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path + " for writing");
    const auto& g = f.grid();
    os << grid_header(g) << '\n' << "t";
    for (int i = 0; i < g.nx; ++i) os << ",x" << i;
    os << '\n' << std::setprecision(17);
    for (int k = 0; k < f.nt(); ++k) {
        os << g.t(k);
        for (double v : f.row(k)) os << ',' << v;
        os << '\n';
    }
    if (!os) throw IoError("write failed for " + path);
}

GridFunction read_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open " + path);
    std::string line;
    std::getline(is, line);
    const SpaceTimeGrid g = parse_header(line);
    std::getline(is, line);
    std::vector<double> values;
    values.reserve(g.size());
    for (int k = 0; k < g.nt(); ++k) {
        if (!std::getline(is, line)) throw IoError(path + ": expected " + std::to_string(g.nt()) + " data rows");
        std::istringstream ls(line);
        std::string cell;
        std::getline(ls, cell, ',');
        int count = 0;
        while (std::getline(ls, cell, ',')) {
            values.push_back(std::stod(cell));
            ++count;
        }
        if (count != g.nx) throw IoError(path + ": row " + std::to_string(k) + " has the wrong width");
    }
    return GridFunction(g, std::move(values));
}

void write_binary(const GridFunction& f, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path + " for writing");
    const auto& g = f.grid();
    os.write(kMagic, 4);
    put<std::uint32_t>(os, kVersion);
    put<std::int32_t>(os, g.N);
    put<std::int32_t>(os, g.nx);
    put<std::int32_t>(os, g.d);
    put<std::int32_t>(os, g.periodic ? 1 : 0);
    put<double>(os, g.t0);
    put<double>(os, g.T);
    put<double>(os, g.x_min);
    put<double>(os, g.x_max);
    for (double v : f.values()) put<double>(os, v);
    if (!os) throw IoError("write failed for " + path);
}

GridFunction read_binary(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path);
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) throw IoError(path + ": not a grid function file");
    if (get<std::uint32_t>(is) != kVersion) throw IoError(path + ": unsupported version");
    SpaceTimeGrid g;
    g.N = get<std::int32_t>(is);
    g.nx = get<std::int32_t>(is);
    g.d = get<std::int32_t>(is);
    g.periodic = get<std::int32_t>(is) != 0;
    g.t0 = get<double>(is);
    g.T = get<double>(is);
    g.x_min = get<double>(is);
    g.x_max = get<double>(is);
    g.validate();
    std::vector<double> values(g.size());
    for (auto& v : values) v = get<double>(is);
    return GridFunction(g, std::move(values));
}

}  // namespace rsf
