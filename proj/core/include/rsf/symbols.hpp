#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace rsf {

struct MultiIndex {
    std::vector<int> orders;

    MultiIndex() = default;
    explicit MultiIndex(std::vector<int> a);
    static MultiIndex single(int k) { return MultiIndex({k}); }

    int order() const;
    std::size_t dim() const { return orders.size(); }
    auto operator<=>(const MultiIndex&) const = default;
};

struct Factor;

// Immutable handle to a canonical symbol tree. Copies share the node.
class Symbol {
public:
    enum class Kind { Initial, Integral };

    Symbol() = default;

    static Symbol initial(std::string name);
    // forcing holds one channel index per power of xi (a multiset; single-channel models use zeros).
    static Symbol integral(std::vector<int> forcing, std::vector<Factor> factors);
    static Symbol integral(int j, std::vector<Factor> factors);

    bool valid() const { return node_ != nullptr; }
    Kind kind() const;
    bool is_initial() const { return kind() == Kind::Initial; }
    const std::string& name() const;
    const std::vector<int>& forcing() const;
    int forcing_power() const;
    const std::vector<Factor>& factors() const;
    int height() const;
    const std::string& key() const;

    friend bool operator==(const Symbol& a, const Symbol& b) { return a.key() == b.key(); }
    friend std::strong_ordering operator<=>(const Symbol& a, const Symbol& b) {
        return a.key() <=> b.key();
    }

private:
    struct Node;
    explicit Symbol(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const Node> node_;
};

struct Factor {
    MultiIndex derivative;
    Symbol symbol;
};

inline Factor factor(Symbol s, int k = 0) { return Factor{MultiIndex::single(k), std::move(s)}; }

struct Alpha {
    int m = 0;
    int l = 0;
    int p = 0;
    int q = 0;

    void validate() const;
    bool operator==(const Alpha&) const = default;
};

enum class DegreeRule { Sum, Product };

struct DegreeConfig {
    double beta = 2.0;
    double deg_xi = -1.5;
    std::map<std::string, double> deg_initial;
    DegreeRule rule = DegreeRule::Sum;

    void validate() const;
    bool operator==(const DegreeConfig&) const = default;
};

struct FeatureSet {
    int n = 0;
    Alpha alpha;
    std::vector<std::string> J;
    int dim = 1;
    int channels = 1;
    std::vector<Symbol> symbols;
    std::optional<double> degree_cutoff;

    std::size_t size() const { return symbols.size(); }
    std::vector<std::string> keys() const;
    std::optional<std::size_t> index_of(const std::string& key) const;
    bool uses_forcing() const;
};

struct EnumerateOptions {
    int dim = 1;
    int channels = 1;
    std::size_t budget = 1'000'000;
    // When both are set the result equals filter_by_degree(enumerate(...)), but branches that can
    // never get back under the cutoff are pruned while enumerating.
    std::optional<DegreeConfig> degree;
    std::optional<double> gamma;
};

FeatureSet enumerate(int n, const Alpha& alpha, const std::vector<std::string>& J,
                     const EnumerateOptions& opts = {});

double degree(const Symbol& s, const DegreeConfig& cfg);

FeatureSet filter_by_degree(const FeatureSet& fs, const DegreeConfig& cfg, double gamma);

std::string canonical_key(const Symbol& s);

bool satisfies_width(const Symbol& s, const Alpha& alpha);

// Union of several feature sets sharing J, dim and channels; keys sorted.
FeatureSet unite(const std::vector<FeatureSet>& sets);

std::string to_json(const FeatureSet& fs, const DegreeConfig* cfg = nullptr);

}  // namespace rsf
