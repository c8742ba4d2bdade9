#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace rsf {

// Philox4x32-10 counter-based generator. Output depends only on (seed, stream, counter), so
// streams are reproducible across platforms and can be split without shared state.
class Philox {
public:
    using Block = std::array<std::uint32_t, 4>;

    explicit Philox(std::uint64_t seed, std::uint64_t stream = 0) : seed_(seed), stream_(stream) {}

    static Block bijection(Block ctr, std::array<std::uint32_t, 2> key);
    Block block(std::uint64_t counter) const;

    std::uint32_t next_u32();
    // Uniform on the open interval (0, 1) with 53 random bits.
    double next_uniform();
    double next_normal();
    void fill_normal(std::span<double> out, double sd = 1.0);

private:
    std::uint64_t seed_, stream_;
    std::uint64_t counter_ = 0;
    Block buf_{};
    int used_ = 4;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

// Seed for item `index` of a family seeded with `base` (two splitmix64 rounds), so per-sample
// seeds of different bases do not collide the way base + index would.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return mix(base ^ mix(index));
}

}  // namespace rsf
