#include "rsf/model.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <iomanip>
#include <set>

#include "rsf/error.hpp"

namespace rsf {

ModelVector::ModelVector(std::vector<std::string> keys, std::vector<GridFunction> values)
    : keys_(std::move(keys)), values_(std::move(values)) {
    if (keys_.size() != values_.size()) throw ConfigError("model vector: keys and values differ in length");
    for (std::size_t i = 0; i < keys_.size(); ++i)
        if (!index_.emplace(keys_[i], i).second) throw ConfigError("model vector: duplicate key " + keys_[i]);
}

const GridFunction& ModelVector::at(const std::string& key) const {
    auto it = index_.find(key);
    if (it == index_.end()) throw ConfigError("model vector has no feature " + key);
    return values_[it->second];
}

const SpaceTimeGrid& ModelVector::grid() const {
    if (values_.empty()) throw ConfigError("empty model vector has no grid");
    return values_.front().grid();
}

namespace {

class Evaluator {
public:
    Evaluator(const ModelInput& in, const OperatorBundle& ops, bool memo) : in_(in), ops_(ops), memo_(memo) {}

    GridFunction compute(const Symbol& s) {
        if (s.is_initial()) {
            auto it = in_.u_init.find(s.name());
            if (it == in_.u_init.end()) throw ConfigError("model input lacks initialising function '" + s.name() + "'");
            return it->second;
        }
        const auto& g = ops_.grid();
        std::vector<double> prod(g.size(), 1.0);
        for (int c : s.forcing()) {
            if (c >= static_cast<int>(in_.xi.size()))
                throw ConfigError("symbol " + s.key() + " needs forcing channel " + std::to_string(c) +
                                  " but the input has " + std::to_string(in_.xi.size()));
            auto xv = in_.xi[static_cast<std::size_t>(c)].values();
            for (std::size_t i = 0; i < prod.size(); ++i) prod[i] *= xv[i];
        }
        for (const auto& f : s.factors()) {
            const GridFunction& v = factor_value(f);
            auto vv = v.values();
            for (std::size_t i = 0; i < prod.size(); ++i) prod[i] *= vv[i];
        }
        try {
            return ops_.apply(GridFunction(g, std::move(prod)));
        } catch (const NumericalError& e) {
            throw e.annotated("symbol " + s.key());
        }
    }

    const GridFunction& value(const Symbol& s) {
        if (memo_) {
            auto it = cache_.find(s.key());
            if (it != cache_.end()) return it->second;
            return cache_.emplace(s.key(), compute(s)).first->second;
        }
        scratch_.push_back(compute(s));
        return scratch_.back();
    }

    std::unordered_map<std::string, GridFunction>& cache() { return cache_; }

private:
    const GridFunction& factor_value(const Factor& f) {
        if (f.derivative.order() == 0) return value(f.symbol);
        std::string dk = render_derivative_key(f);
        if (memo_) {
            auto it = dcache_.find(dk);
            if (it != dcache_.end()) return it->second;
            return dcache_.emplace(dk, space_derivative(value(f.symbol), f.derivative)).first->second;
        }
        GridFunction base = compute(f.symbol);
        scratch_.push_back(space_derivative(base, f.derivative));
        return scratch_.back();
    }

    static std::string render_derivative_key(const Factor& f) {
        std::string k = "D";
        for (int a : f.derivative.orders) k += std::to_string(a) + ",";
        return k + "(" + f.symbol.key() + ")";
    }

    const ModelInput& in_;
    const OperatorBundle& ops_;
    bool memo_;
    std::unordered_map<std::string, GridFunction> cache_;
    std::unordered_map<std::string, GridFunction> dcache_;
    std::deque<GridFunction> scratch_;
};

void collect(const Symbol& s, std::map<std::string, Symbol>& out) {
    if (!out.emplace(s.key(), s).second) return;
    if (s.is_initial()) return;
    for (const auto& f : s.factors()) collect(f.symbol, out);
}

}  // namespace

ModelVector evaluate(const FeatureSet& fs, const ModelInput& input, const OperatorBundle& ops,
                     const EvaluateOptions& opts) {
    const auto& g = ops.grid();
    for (const auto& [name, f] : input.u_init)
        if (!(f.grid() == g)) throw ConfigError("initialising function '" + name + "' is not on the operator grid");
    for (const auto& x : input.xi)
        if (!(x.grid() == g)) throw ConfigError("forcing is not on the operator grid");
    if (fs.uses_forcing() && input.xi.empty()) throw ConfigError("feature set uses forcing but no forcing was given");

    Evaluator ev(input, ops, opts.memoize);
    std::vector<GridFunction> values;
    values.reserve(fs.size());
    if (opts.memoize) {
        std::map<std::string, Symbol> needed;
        for (const auto& s : fs.symbols) collect(s, needed);
        std::vector<Symbol> order;
        for (auto& [k, s] : needed) order.push_back(s);
        std::stable_sort(order.begin(), order.end(),
                         [](const Symbol& a, const Symbol& b) { return a.height() < b.height(); });
        for (const auto& s : order) ev.value(s);
        for (const auto& s : fs.symbols) values.push_back(std::move(ev.cache().at(s.key())));
    } else {
        for (const auto& s : fs.symbols) values.push_back(ev.compute(s));
    }
    return ModelVector(fs.keys(), std::move(values));
}

std::vector<double> evaluate_at(const ModelVector& mv, int k, int i) {
    std::vector<double> row(mv.size());
    if (mv.size() == 0) return row;
    const auto& g = mv.grid();
    if (k < 0 || k >= g.nt() || i < 0 || i >= g.nx)
        throw ConfigError("point (" + std::to_string(k) + ", " + std::to_string(i) + ") is not on the grid");
    for (std::size_t j = 0; j < mv.size(); ++j) row[j] = mv[j](k, i);
    return row;
}

Eigen::MatrixXd time_slice_features(const ModelVector& mv, int k) {
    if (mv.size() == 0) return {};
    const auto& g = mv.grid();
    if (k < 0 || k >= g.nt()) throw ConfigError("time index out of range");
    Eigen::MatrixXd out(g.nx, static_cast<Eigen::Index>(mv.size()));
    for (std::size_t j = 0; j < mv.size(); ++j) {
        auto r = mv[j].row(k);
        for (int i = 0; i < g.nx; ++i) out(i, static_cast<Eigen::Index>(j)) = r[static_cast<std::size_t>(i)];
    }
    return out;
}

void write_feature_csv(const ModelVector& mv, const std::vector<std::pair<int, int>>& points, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open " + path + " for writing");
    os << "t_index,x_index";
    for (const auto& k : mv.keys()) os << ",\"" << k << '"';
    os << '\n' << std::setprecision(17);
    for (auto [k, i] : points) {
        os << k << ',' << i;
        for (double v : evaluate_at(mv, k, i)) os << ',' << v;
        os << '\n';
    }
    if (!os) throw IoError("write failed for " + path);
}

Symbol signature_symbol(std::span<const int> word) {
    if (word.empty()) throw ConfigError("signature word must be non-empty");
    Symbol s = Symbol::integral(std::vector<int>{word[0]}, {});
    for (std::size_t i = 1; i < word.size(); ++i) s = Symbol::integral(std::vector<int>{word[i]}, {factor(s)});
    return s;
}

namespace {

using Levels = std::vector<std::vector<double>>;

Levels chen(const Levels& a, const Levels& b, int K) {
    const int n = static_cast<int>(a.size()) - 1;
    Levels out(a.size());
    std::size_t width = 1;
    for (int L = 0; L <= n; ++L, width *= static_cast<std::size_t>(K)) {
        out[L].assign(width, 0.0);
        for (int i = 0; i <= L; ++i) {
            const auto& A = a[i];
            const auto& B = b[L - i];
            for (std::size_t x = 0; x < A.size(); ++x) {
                if (A[x] == 0.0) continue;
                for (std::size_t y = 0; y < B.size(); ++y) out[L][x * B.size() + y] += A[x] * B[y];
            }
        }
    }
    return out;
}

Levels segment(std::span<const double> delta, int n) {
    const auto K = delta.size();
    Levels out(static_cast<std::size_t>(n) + 1);
    out[0] = {1.0};
    for (int L = 1; L <= n; ++L) {
        const auto& prev = out[L - 1];
        out[L].resize(prev.size() * K);
        for (std::size_t x = 0; x < prev.size(); ++x)
            for (std::size_t c = 0; c < K; ++c) out[L][x * K + c] = prev[x] * delta[c] / L;
    }
    return out;
}

}  // namespace

std::map<std::string, double> signature_oracle(const GridFunction& path, int level) {
    const auto& g = path.grid();
    if (g.d != 0) throw ConfigError("signature oracle needs a d = 0 path");
    if (level < 1) throw ConfigError("signature level must be at least 1");
    const int K = g.nx;
    Levels sig(static_cast<std::size_t>(level) + 1);
    {
        std::size_t w = 1;
        for (int L = 0; L <= level; ++L, w *= static_cast<std::size_t>(K)) sig[L].assign(w, 0.0);
        sig[0][0] = 1.0;
    }
    std::vector<double> delta(static_cast<std::size_t>(K));
    for (int k = 0; k < g.N; ++k) {
        for (int c = 0; c < K; ++c) delta[static_cast<std::size_t>(c)] = path(k + 1, c) - path(k, c);
        sig = chen(sig, segment(delta, level), K);
    }
    std::map<std::string, double> out;
    for (int L = 1; L <= level; ++L) {
        std::vector<int> word(static_cast<std::size_t>(L));
        for (std::size_t idx = 0; idx < sig[L].size(); ++idx) {
            std::size_t r = idx;
            for (int p = L - 1; p >= 0; --p) {
                word[static_cast<std::size_t>(p)] = static_cast<int>(r % static_cast<std::size_t>(K));
                r /= static_cast<std::size_t>(K);
            }
            out[signature_symbol(word).key()] = sig[L][idx];
        }
    }
    return out;
}

std::vector<GridFunction> path_derivative(const GridFunction& path) {
    const auto& g = path.grid();
    if (g.d != 0) throw ConfigError("path derivative needs a d = 0 path");
    SpaceTimeGrid cg = g;
    cg.nx = 1;
    const double dt = g.dt();
    std::vector<GridFunction> out;
    for (int c = 0; c < g.nx; ++c) {
        GridFunction d(cg);
        for (int k = 0; k <= g.N; ++k) {
            if (k == 0) d(k, 0) = (path(1, c) - path(0, c)) / dt;
            else if (k == g.N) d(k, 0) = (path(k, c) - path(k - 1, c)) / dt;
            else d(k, 0) = (path(k + 1, c) - path(k - 1, c)) / (2.0 * dt);
        }
        out.push_back(std::move(d));
    }
    return out;
}

}  // namespace rsf
