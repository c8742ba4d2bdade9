#include "rsf/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rsf/error.hpp"
#include "rsf/random.hpp"

namespace rsf {

namespace {
constexpr std::uint64_t kSplitStream = 4;
}

Split make_split(int count, int ntrain, int ntest, std::uint64_t seed) {
    if (count < 0 || ntrain < 0 || ntest < 0) throw ConfigError("split sizes must be non-negative");
    if (ntrain + ntest > count)
        throw ConfigError("split " + std::to_string(ntrain) + "/" + std::to_string(ntest) + " needs more than " +
                          std::to_string(count) + " samples");
    std::vector<int> idx(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) idx[static_cast<std::size_t>(i)] = i;
    Philox rng(seed, kSplitStream);
    for (int i = count - 1; i > 0; --i) {
        const auto j = static_cast<int>(rng.next_uniform() * (i + 1));
        std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(std::min(j, i))]);
    }
    Split s;
    s.train.assign(idx.begin(), idx.begin() + ntrain);
    s.test.assign(idx.begin() + ntrain, idx.begin() + ntrain + ntest);
    std::sort(s.train.begin(), s.train.end());
    std::sort(s.test.begin(), s.test.end());
    return s;
}

Split repeat_split(int count, int ntrain, int ntest, std::uint64_t seed, int repeat) {
    return make_split(count, ntrain, ntest, seed + static_cast<std::uint64_t>(repeat));
}

namespace dataset {

namespace fs = std::filesystem;

fs::path meta_path(const fs::path& dir) { return dir / "meta.json"; }
fs::path split_path(const fs::path& dir) { return dir / "split.json"; }

fs::path sample_path(const fs::path& dir, int index) {
    char name[32];
    std::snprintf(name, sizeof name, "u_%05d.bin", index);
    return dir / "samples" / name;
}

void write_text(const fs::path& path, const std::string& text) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");
    os << text;
    if (!os) throw IoError("write failed for " + path.string());
}

std::string read_text(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void write_splits(const fs::path& dir, const std::vector<Split>& splits) {
    auto arr = nlohmann::json::array();
    for (std::size_t r = 0; r < splits.size(); ++r)
        arr.push_back({{"repeat", r}, {"train", splits[r].train}, {"test", splits[r].test}});
    write_text(split_path(dir), nlohmann::json{{"splits", arr}}.dump(1));
}

std::vector<Split> read_splits(const fs::path& dir) {
    try {
        const auto j = nlohmann::json::parse(read_text(split_path(dir)));
        std::vector<Split> out;
        for (const auto& s : j.at("splits"))
            out.push_back(Split{s.at("train").get<std::vector<int>>(), s.at("test").get<std::vector<int>>()});
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed " + split_path(dir).string() + ": " + e.what());
    }
}

void write_sample(const fs::path& dir, int index, const GridFunction& u) {
    const auto p = sample_path(dir, index);
    std::error_code ec;
    fs::create_directories(p.parent_path(), ec);
    write_binary(u, p.string());
}

GridFunction read_sample(const fs::path& dir, int index) { return read_binary(sample_path(dir, index).string()); }

}  // namespace dataset

}  // namespace rsf
