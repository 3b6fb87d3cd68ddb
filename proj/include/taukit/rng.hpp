#pragma once

// Counter-based random streams. Each (seed, stream) pair is an independent
// reproducible sequence, so replicate r can be computed by any worker in any
// order and still draw the same numbers. Core block cipher is Philox4x32-10;
// the distribution samplers are hand-rolled so that outputs are stable
// across standard libraries.

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace taukit {

namespace detail {
inline void philox_round(std::array<std::uint32_t, 4>& c, std::uint32_t k0, std::uint32_t k1) {
    const std::uint64_t p0 = 0xD2511F53ull * c[0];
    const std::uint64_t p1 = 0xCD9E8D57ull * c[2];
    const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    c = {hi1 ^ c[1] ^ k0, lo1, hi0 ^ c[3] ^ k1, lo0};
}
} // namespace detail

// One 256-bit counter block -> four 32-bit words.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                               std::uint32_t key0, std::uint32_t key1) {
    for (int round = 0; round < 10; ++round) {
        detail::philox_round(counter, key0, key1);
        key0 += 0x9E3779B9u; // golden ratio
        key1 += 0xBB67AE85u; // sqrt(3)-1
    }
    return counter;
}

class rng_stream {
public:
    rng_stream(std::uint64_t seed, std::uint64_t stream)
        : key0_(static_cast<std::uint32_t>(seed)),
          key1_(static_cast<std::uint32_t>(seed >> 32)),
          stream_lo_(static_cast<std::uint32_t>(stream)),
          stream_hi_(static_cast<std::uint32_t>(stream >> 32)) {}

    std::uint64_t next_u64() {
        if (have_) {
            have_ = false;
            return spare_;
        }
        const auto block = philox4x32({static_cast<std::uint32_t>(ctr_),
                                       static_cast<std::uint32_t>(ctr_ >> 32),
                                       stream_lo_, stream_hi_},
                                      key0_, key1_);
        ++ctr_;
        spare_ = (static_cast<std::uint64_t>(block[3]) << 32) | block[2];
        have_ = true;
        return (static_cast<std::uint64_t>(block[1]) << 32) | block[0];
    }

    // [0, 1)
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform in [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // unbiased integer in [0, n); n >= 1
    std::uint64_t below(std::uint64_t n) {
        // multiply-shift with rejection on the low slice
        while (true) {
            const std::uint64_t x = next_u64();
            const unsigned __int128 m = static_cast<unsigned __int128>(x) * n;
            const std::uint64_t lo = static_cast<std::uint64_t>(m);
            if (lo >= n) return static_cast<std::uint64_t>(m >> 64);
            const std::uint64_t t = (0 - n) % n;
            if (lo >= t) return static_cast<std::uint64_t>(m >> 64);
        }
    }

    double exponential(double rate) { return -std::log1p(-uniform01()) / rate; }

    double normal(double mean = 0.0, double sd = 1.0) {
        // Marsaglia polar form; the spare is deliberately discarded to keep
        // the draw count per call fixed at "until accept".
        while (true) {
            const double u = 2.0 * uniform01() - 1.0;
            const double v = 2.0 * uniform01() - 1.0;
            const double s = u * u + v * v;
            if (s > 0.0 && s < 1.0)
                return mean + sd * u * std::sqrt(-2.0 * std::log(s) / s);
        }
    }

    // Marsaglia–Tsang; shape > 0, scale > 0.
    double gamma(double shape, double scale) {
        if (shape < 1.0) {
            const double u = uniform01();
            return gamma(shape + 1.0, scale) * std::pow(u > 0 ? u : 1e-300, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        while (true) {
            const double x = normal();
            const double t = 1.0 + c * x;
            if (t <= 0) continue;
            const double v = t * t * t;
            const double u = uniform01();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v * scale;
            if (u > 0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v * scale;
        }
    }

    // Knuth product method; fine for the small means used in simulation.
    std::uint32_t poisson(double mean) {
        const double limit = std::exp(-mean);
        std::uint32_t k = 0;
        double p = 1.0;
        do {
            ++k;
            p *= uniform01();
        } while (p > limit);
        return k - 1;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[below(i)]);
    }

private:
    std::uint32_t key0_, key1_, stream_lo_, stream_hi_;
    std::uint64_t ctr_ = 0;
    std::uint64_t spare_ = 0;
    bool have_ = false;
};

} // namespace taukit
