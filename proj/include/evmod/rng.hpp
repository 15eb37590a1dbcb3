#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace evmod {

// Deterministic random source. The engine (std::mt19937_64) is fully
// specified by the standard; the distribution transforms below are written
// out by hand because the std::*_distribution algorithms are
// implementation-defined and would break cross-toolchain reproducibility.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : seed_material_(mix(seed)), engine_(seed_material_) {}

    // Derives a decorrelated child generator; used to give independent
    // streams to restarts, partitions, and scene objects.
    Rng fork(std::uint64_t stream) const {
        return Rng(seed_material_ + 0x9e3779b97f4a7c15ULL * (stream + 1));
    }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, n). Masked rejection, bias-free.
    std::uint64_t next_below(std::uint64_t n) {
        if (n <= 1) return 0;
        std::uint64_t mask = ~std::uint64_t(0) >> countl_zero(n - 1);
        std::uint64_t v;
        do {
            v = engine_() & mask;
        } while (v >= n);
        return v;
    }

    // Uniform double in [0, 1) with 53 random bits.
    double next_unit() { return double(engine_() >> 11) * 0x1.0p-53; }

    // Poisson draw via Knuth's product method, chunked so the running
    // product never underflows for large means.
    std::uint64_t next_poisson(double mean) {
        std::uint64_t total = 0;
        while (mean > 500.0) {
            total += poisson_small(500.0);
            mean -= 500.0;
        }
        return total + poisson_small(mean);
    }

  private:
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    static int countl_zero(std::uint64_t v) {
        int n = 0;
        for (std::uint64_t probe = std::uint64_t(1) << 63; probe && !(v & probe); probe >>= 1) ++n;
        return n;
    }

    std::uint64_t poisson_small(double mean) {
        if (mean <= 0.0) return 0;
        const double limit = std::exp(-mean);
        std::uint64_t k = 0;
        double product = next_unit();
        while (product > limit) {
            ++k;
            product *= next_unit();
        }
        return k;
    }

    std::uint64_t seed_material_;
    std::mt19937_64 engine_;
};

}  // namespace evmod
