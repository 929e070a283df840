#ifndef DERMBENCH_RNG_HPP
#define DERMBENCH_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace dermbench {

// Seeded generator with pinned output streams. std::mt19937_64 is fully
// specified by the standard; the distributions below are hand-rolled because
// the std distribution objects are implementation-defined and would break
// byte-identical reruns across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform01();
    }

    // Box-Muller; one value per call, the companion value is discarded so the
    // stream stays position-independent.
    double gaussian() {
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        return r * std::cos(6.28318530717958647692 * u2);
    }

    double gaussian(double mean, double stddev) {
        return mean + stddev * gaussian();
    }

    // Uniform integer in [0, n), rejection-free modulo bias is negligible for
    // the small n used here but we reject anyway to keep draws exact.
    std::uint64_t below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v = engine_();
        while (v >= limit) v = engine_();
        return v % n;
    }

private:
    std::mt19937_64 engine_;
};

} // namespace dermbench

#endif
