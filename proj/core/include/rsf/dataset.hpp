#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rsf/grid.hpp"

namespace rsf {

struct Split {
    std::vector<int> train;
    std::vector<int> test;
};

// Shuffles 0..count-1 (Fisher-Yates on a Philox stream) and takes the first ntrain as training
// indices and the next ntest as test indices. Both lists come back sorted.
Split make_split(int count, int ntrain, int ntest, std::uint64_t seed);

// Split used by repeat r of an experiment seeded with `seed`.
Split repeat_split(int count, int ntrain, int ntest, std::uint64_t seed, int repeat);

// On-disk layout of a generated dataset:
//   meta.json            configuration, grid, seeds
//   split.json           train/test membership per repeat
//   samples/u_NNNNN.bin  one binary GridFunction per sample
namespace dataset {

std::filesystem::path meta_path(const std::filesystem::path& dir);
std::filesystem::path split_path(const std::filesystem::path& dir);
std::filesystem::path sample_path(const std::filesystem::path& dir, int index);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

void write_splits(const std::filesystem::path& dir, const std::vector<Split>& splits);
std::vector<Split> read_splits(const std::filesystem::path& dir);

void write_sample(const std::filesystem::path& dir, int index, const GridFunction& u);
GridFunction read_sample(const std::filesystem::path& dir, int index);

}  // namespace dataset

}  // namespace rsf
