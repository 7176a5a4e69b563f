#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace udbm {

// Seeded uniform stream. Distributions are derived by hand from the raw
// 64-bit output because std:: distribution output is implementation-defined;
// reproducibility is defined per (generator_id, seed).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    static std::string generator_id() { return "mt19937_64:u53"; }

    // uniform in [0,1) with 53-bit resolution
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // 1 with probability p; strict comparison so p=0 never fires and p=1 always does
    int bernoulli(double p) { return p > uniform() ? 1 : 0; }

    // deterministic sub-stream seed (splitmix64 of seed + stream index)
    static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
        std::uint64_t z = seed + (stream + 1) * 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace udbm
