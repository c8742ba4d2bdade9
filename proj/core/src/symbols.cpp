#include "rsf/symbols.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "rsf/error.hpp"

namespace rsf {

struct Symbol::Node {
    Kind kind = Kind::Initial;
    std::string name;
    std::vector<int> forcing;
    std::vector<Factor> factors;
    int height = 0;
    std::string key;
};

MultiIndex::MultiIndex(std::vector<int> a) : orders(std::move(a)) {
    for (int v : orders)
        if (v < 0) throw ConfigError("multi-index entries must be non-negative");
}

int MultiIndex::order() const { return std::accumulate(orders.begin(), orders.end(), 0); }

namespace {

bool factor_less(const Factor& a, const Factor& b) {
    const int oa = a.derivative.order(), ob = b.derivative.order();
    if (oa != ob) return oa < ob;
    if (a.derivative.orders != b.derivative.orders) return a.derivative.orders < b.derivative.orders;
    return a.symbol.key() < b.symbol.key();
}

std::string render_factor(const Factor& f) {
    if (f.derivative.order() == 0) return f.symbol.key();
    std::string d;
    if (f.derivative.dim() == 1) {
        d = "D" + std::to_string(f.derivative.orders[0]);
    } else {
        d = "D(";
        for (std::size_t i = 0; i < f.derivative.dim(); ++i) {
            if (i) d += ',';
            d += std::to_string(f.derivative.orders[i]);
        }
        d += ')';
    }
    return d + "(" + f.symbol.key() + ")";
}

std::string render_channel(int c) { return c == 0 ? std::string("xi") : "xi_" + std::to_string(c); }

}  // namespace

Symbol Symbol::initial(std::string name) {
    if (name.empty()) throw ConfigError("initialising symbol needs a name");
    auto n = std::make_shared<Node>();
    n->kind = Kind::Initial;
    n->key = name;
    n->name = std::move(name);
    return Symbol(std::move(n));
}

Symbol Symbol::integral(std::vector<int> forcing, std::vector<Factor> factors) {
    if (forcing.empty() && factors.empty())
        throw ConfigError("integral symbol needs at least one factor or forcing power");
    for (int c : forcing)
        if (c < 0) throw ConfigError("forcing channel must be non-negative");
    for (const auto& f : factors)
        if (!f.symbol.valid()) throw ConfigError("integral symbol has an empty factor");
    std::sort(forcing.begin(), forcing.end());
    std::sort(factors.begin(), factors.end(), factor_less);

    auto n = std::make_shared<Node>();
    n->kind = Kind::Integral;
    int h = 0;
    for (const auto& f : factors) h = std::max(h, f.symbol.height());
    n->height = h + 1;
    std::string key = "I[";
    bool first = true;
    for (int c : forcing) {
        if (!first) key += '*';
        key += render_channel(c);
        first = false;
    }
    for (const auto& f : factors) {
        if (!first) key += '*';
        key += render_factor(f);
        first = false;
    }
    key += ']';
    n->key = std::move(key);
    n->forcing = std::move(forcing);
    n->factors = std::move(factors);
    return Symbol(std::move(n));
}

Symbol Symbol::integral(int j, std::vector<Factor> factors) {
    if (j < 0) throw ConfigError("forcing power must be non-negative");
    return integral(std::vector<int>(static_cast<std::size_t>(j), 0), std::move(factors));
}

Symbol::Kind Symbol::kind() const { return node_->kind; }
const std::string& Symbol::name() const { return node_->name; }
const std::vector<int>& Symbol::forcing() const { return node_->forcing; }
int Symbol::forcing_power() const { return static_cast<int>(node_->forcing.size()); }
const std::vector<Factor>& Symbol::factors() const { return node_->factors; }
int Symbol::height() const { return node_->height; }

const std::string& Symbol::key() const {
    static const std::string empty;
    return node_ ? node_->key : empty;
}

void Alpha::validate() const {
    if (m < 0 || l < 0 || p < 0 || q < 0) throw ConfigError("alpha components must be non-negative");
}

void DegreeConfig::validate() const {
    if (!(beta > 0.0)) throw ConfigError("degree config: beta must be positive");
}

std::vector<std::string> FeatureSet::keys() const {
    std::vector<std::string> out;
    out.reserve(symbols.size());
    for (const auto& s : symbols) out.push_back(s.key());
    return out;
}

std::optional<std::size_t> FeatureSet::index_of(const std::string& key) const {
    for (std::size_t i = 0; i < symbols.size(); ++i)
        if (symbols[i].key() == key) return i;
    return std::nullopt;
}

namespace {

bool symbol_uses_forcing(const Symbol& s) {
    if (s.is_initial()) return false;
    if (s.forcing_power() > 0) return true;
    for (const auto& f : s.factors())
        if (symbol_uses_forcing(f.symbol)) return true;
    return false;
}

void multi_indices(int dim, int q, std::vector<int>& cur, std::vector<MultiIndex>& out) {
    if (static_cast<int>(cur.size()) == dim) {
        out.emplace_back(cur);
        return;
    }
    const int used = std::accumulate(cur.begin(), cur.end(), 0);
    for (int a = 0; a + used <= q; ++a) {
        cur.push_back(a);
        multi_indices(dim, q, cur, out);
        cur.pop_back();
    }
}

// Non-decreasing sequences of length k over [0, n).
template <class F>
void for_each_multiset(std::size_t n, int k, F&& fn) {
    if (k == 0) {
        std::vector<std::size_t> none;
        fn(none);
        return;
    }
    if (n == 0) return;
    std::vector<std::size_t> idx(static_cast<std::size_t>(k), 0);
    while (true) {
        fn(idx);
        int i = k - 1;
        while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - 1) --i;
        if (i < 0) return;
        const std::size_t v = idx[static_cast<std::size_t>(i)] + 1;
        for (int j = i; j < k; ++j) idx[static_cast<std::size_t>(j)] = v;
    }
}

int width_cap(const Alpha& a, int j) { return j == 0 ? a.m : a.l; }

// Lower bound on the degree change caused by wrapping a symbol once more, valid for every
// parent in S^n. Returns 0 when no bound below zero is needed.
double wrap_drop(int n, const Alpha& alpha, const std::vector<std::string>& J, const DegreeConfig& cfg) {
    std::optional<double> md;
    for (const auto& name : J) {
        const double d = cfg.deg_initial.at(name);
        md = md ? std::min(*md, d) : d;
    }
    std::vector<std::optional<double>> mins{md};
    for (int h = 1; h <= n; ++h) {
        std::optional<double> best = md;
        for (int j = 0; j <= alpha.p; ++j) {
            for (int k = 0; k + j <= width_cap(alpha, j); ++k) {
                if (k + j < 1) continue;
                if (k > 0 && !md) continue;
                const double v = cfg.beta + j * cfg.deg_xi + (k > 0 ? k * (*md - alpha.q) : 0.0);
                best = best ? std::min(*best, v) : v;
            }
        }
        md = best;
        mins.push_back(md);
    }
    const double L = (n >= 1 && mins[static_cast<std::size_t>(n - 1)])
                         ? *mins[static_cast<std::size_t>(n - 1)] - alpha.q
                         : 0.0;
    std::optional<double> worst;
    for (int j = 0; j <= alpha.p; ++j)
        for (int k = 1; k + j <= width_cap(alpha, j); ++k) {
            const double v = j * cfg.deg_xi + (k - 1) * std::min(0.0, L);
            worst = worst ? std::min(*worst, v) : v;
        }
    if (!worst) return 0.0;
    return std::min(0.0, cfg.beta - alpha.q + *worst);
}

}  // namespace

bool FeatureSet::uses_forcing() const {
    return std::any_of(symbols.begin(), symbols.end(), symbol_uses_forcing);
}

FeatureSet enumerate(int n, const Alpha& alpha, const std::vector<std::string>& J,
                     const EnumerateOptions& opts) {
    if (n < 0) throw ConfigError("height n must be non-negative");
    alpha.validate();
    if (opts.dim < 0) throw ConfigError("spatial dimension must be non-negative");
    if (opts.channels < 1) throw ConfigError("forcing needs at least one channel");
    {
        std::set<std::string> uniq(J.begin(), J.end());
        if (uniq.size() != J.size()) throw ConfigError("duplicate initialising symbol names");
    }

    const bool prune = opts.degree.has_value() && opts.gamma.has_value();
    double drop = 0.0;
    double gamma = std::numeric_limits<double>::infinity();
    if (prune) {
        opts.degree->validate();
        for (const auto& name : J)
            if (!opts.degree->deg_initial.count(name))
                throw ConfigError("degree config lacks an entry for initialising symbol '" + name + "'");
        gamma = *opts.gamma;
        if (opts.degree->rule == DegreeRule::Sum) drop = wrap_drop(n, alpha, J, *opts.degree);
    }
    const bool can_prune = prune && opts.degree->rule == DegreeRule::Sum;

    std::unordered_map<std::string, double> deg_cache;
    auto deg_of = [&](const Symbol& s) {
        auto it = deg_cache.find(s.key());
        if (it != deg_cache.end()) return it->second;
        const double d = degree(s, *opts.degree);
        deg_cache.emplace(s.key(), d);
        return d;
    };
    auto keep = [&](const Symbol& s) {
        if (!can_prune) return true;
        return deg_of(s) + (n - s.height()) * drop <= gamma;
    };

    std::vector<Symbol> current;
    std::unordered_set<std::string> seen;
    for (const auto& name : J) {
        Symbol s = Symbol::initial(name);
        seen.insert(s.key());
        if (keep(s)) current.push_back(s);
    }

    std::vector<MultiIndex> derivs;
    {
        std::vector<int> cur;
        multi_indices(opts.dim, opts.dim == 0 ? 0 : alpha.q, cur, derivs);
    }

    std::size_t candidates = 0;
    for (int h = 1; h <= n; ++h) {
        std::vector<Factor> pool;
        pool.reserve(current.size() * derivs.size());
        for (const auto& s : current)
            for (const auto& a : derivs) pool.push_back(Factor{a, s});

        std::vector<Symbol> fresh;
        for (int j = 0; j <= alpha.p; ++j) {
            const int cap = width_cap(alpha, j);
            for_each_multiset(static_cast<std::size_t>(opts.channels), j, [&](const std::vector<std::size_t>& ch) {
                std::vector<int> forcing(ch.begin(), ch.end());
                for (int k = std::max(0, 1 - j); k + j <= cap; ++k) {
                    for_each_multiset(pool.size(), k, [&](const std::vector<std::size_t>& idx) {
                        if (++candidates > opts.budget)
                            throw ConfigError("enumeration exceeds the symbol budget of " +
                                              std::to_string(opts.budget) + " candidates");
                        std::vector<Factor> fs;
                        fs.reserve(idx.size());
                        for (std::size_t i : idx) fs.push_back(pool[i]);
                        Symbol s = Symbol::integral(forcing, std::move(fs));
                        if (!seen.insert(s.key()).second) return;
                        if (keep(s)) fresh.push_back(std::move(s));
                    });
                }
            });
        }
        current.insert(current.end(), std::make_move_iterator(fresh.begin()),
                       std::make_move_iterator(fresh.end()));
    }

    FeatureSet fs;
    fs.n = n;
    fs.alpha = alpha;
    fs.J = J;
    fs.dim = opts.dim;
    fs.channels = opts.channels;
    fs.symbols = std::move(current);
    std::sort(fs.symbols.begin(), fs.symbols.end());
    if (prune) return filter_by_degree(fs, *opts.degree, gamma);
    return fs;
}

double degree(const Symbol& s, const DegreeConfig& cfg) {
    if (s.is_initial()) {
        auto it = cfg.deg_initial.find(s.name());
        if (it == cfg.deg_initial.end())
            throw ConfigError("degree config lacks an entry for initialising symbol '" + s.name() + "'");
        return it->second;
    }
    if (cfg.rule == DegreeRule::Sum) {
        double d = cfg.beta + s.forcing_power() * cfg.deg_xi;
        for (const auto& f : s.factors()) d += degree(f.symbol, cfg) - f.derivative.order();
        return d;
    }
    double prod = 1.0;
    for (int i = 0; i < s.forcing_power(); ++i) prod *= cfg.deg_xi;
    for (const auto& f : s.factors()) prod *= degree(f.symbol, cfg) - f.derivative.order();
    return cfg.beta + prod;
}

FeatureSet filter_by_degree(const FeatureSet& fs, const DegreeConfig& cfg, double gamma) {
    cfg.validate();
    FeatureSet out = fs;
    out.symbols.clear();
    for (const auto& s : fs.symbols)
        if (degree(s, cfg) <= gamma) out.symbols.push_back(s);
    out.degree_cutoff = gamma;
    if (fs.degree_cutoff) out.degree_cutoff = std::min(*fs.degree_cutoff, gamma);
    return out;
}

std::string canonical_key(const Symbol& s) { return s.key(); }

bool satisfies_width(const Symbol& s, const Alpha& alpha) {
    if (s.is_initial()) return true;
    const int j = s.forcing_power();
    const int k = static_cast<int>(s.factors().size());
    if (j > alpha.p) return false;
    if (k + j < 1 || k + j > width_cap(alpha, j)) return false;
    for (const auto& f : s.factors()) {
        if (f.derivative.order() > alpha.q) return false;
        if (!satisfies_width(f.symbol, alpha)) return false;
    }
    return true;
}

FeatureSet unite(const std::vector<FeatureSet>& sets) {
    if (sets.empty()) throw ConfigError("unite needs at least one feature set");
    FeatureSet out = sets.front();
    std::map<std::string, Symbol> all;
    for (const auto& fs : sets) {
        if (fs.dim != out.dim || fs.channels != out.channels)
            throw ConfigError("cannot unite feature sets over different grids or channels");
        out.n = std::max(out.n, fs.n);
        for (const auto& name : fs.J)
            if (std::find(out.J.begin(), out.J.end(), name) == out.J.end()) out.J.push_back(name);
        for (const auto& s : fs.symbols) all.emplace(s.key(), s);
    }
    out.symbols.clear();
    for (auto& [k, s] : all) out.symbols.push_back(s);
    out.degree_cutoff.reset();
    return out;
}

std::string to_json(const FeatureSet& fs, const DegreeConfig* cfg) {
    nlohmann::json j;
    j["n"] = fs.n;
    j["alpha"] = {fs.alpha.m, fs.alpha.l, fs.alpha.p, fs.alpha.q};
    j["J"] = fs.J;
    j["dim"] = fs.dim;
    j["channels"] = fs.channels;
    j["symbols"] = fs.keys();
    auto degrees = nlohmann::json::array();
    for (const auto& s : fs.symbols) {
        if (cfg) degrees.push_back(degree(s, *cfg));
        else degrees.push_back(nullptr);
    }
    j["degrees"] = degrees;
    if (fs.degree_cutoff) j["degree_cutoff"] = *fs.degree_cutoff;
    else j["degree_cutoff"] = nullptr;
    return j.dump(2);
}

}  // namespace rsf
