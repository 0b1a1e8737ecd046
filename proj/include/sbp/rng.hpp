#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace sbp {

// SplitMix64 step; used to derive independent stream seeds.
inline std::uint64_t seed_mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic random stream. All variates are derived from raw mt19937_64
// output (whose sequence the standard pins down), so runs are reproducible
// across platforms and toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t bits() { return eng_(); }

    // Uniform in the open interval (0, 1).
    double uniform01() { return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53; }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    // Uniform integer in [0, n).
    int uniform_int(int n) {
        return n <= 1 ? 0 : static_cast<int>(uniform01() * n) % n;
    }

    double normal(double mean, double sd);

    double exponential(double rate);

    // Seeded Fisher-Yates; avoids std::shuffle so the permutation is
    // implementation-independent.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
            int j = uniform_int(i + 1);
            std::swap(v[i], v[j]);
        }
    }

    // k distinct values from [0, n), order randomized.
    std::vector<int> sample_without_replacement(int n, int k);

private:
    std::mt19937_64 eng_;
};

}  // namespace sbp
