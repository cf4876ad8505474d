#ifndef DSCOM_RNG_HPP
#define DSCOM_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>

namespace dscom {

using Seed = std::uint64_t;

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Child seed for replication / worker `index`.
constexpr Seed derive_seed(Seed master, std::uint64_t index) noexcept
{
    return splitmix64(splitmix64(master) ^ splitmix64(index + 0x632be59bd9b4e019ULL));
}

/// Child seed for a named pipeline stage (FNV-1a over the name).
constexpr Seed derive_seed(Seed master, std::string_view stage) noexcept
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : stage) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return splitmix64(splitmix64(master) ^ h);
}

/// Uniform in [0,1) from 53 high bits.
constexpr double bits_to_unit(std::uint64_t bits) noexcept
{
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Counter-based uniform draw: the same (seed, counter) always yields the same value,
/// independent of call order.
constexpr double hash_uniform(Seed seed, std::uint64_t counter) noexcept
{
    return bits_to_unit(splitmix64(seed ^ splitmix64(counter)));
}

/// Seeded generator. The distributions are written out here rather than taken from
/// <random> so that streams are identical across standard library implementations.
class Rng {
public:
    explicit Rng(Seed seed) : engine_(splitmix64(seed)) {}

    std::uint64_t next() { return engine_(); }

    double uniform() { return bits_to_unit(engine_()); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    bool bernoulli(double p) { return uniform() < p; }

    /// Uniform integer in [0, n).
    std::size_t index(std::size_t n)
    {
        if (n <= 1) {
            return 0;
        }
        const std::uint64_t bound = n;
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
        std::uint64_t x = engine_();
        while (x >= limit) {
            x = engine_();
        }
        return static_cast<std::size_t>(x % bound);
    }

    double normal()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) {
            u1 = uniform();
        }
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(t);
        has_spare_ = true;
        return r * std::cos(t);
    }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace dscom

#endif
