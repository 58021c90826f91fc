#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace thermodemon
{

constexpr std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Stable seed for stream `index` of a run seeded with `master`. Purely a function
/// of its arguments, so ensembles are identical however they are scheduled.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index, std::uint64_t stream = 0)
{
    return splitmix64(splitmix64(master ^ splitmix64(stream + 0x632be59bd9b4e019ULL)) + index);
}

/// xoshiro256** with explicit samplers. The standard distributions are avoided
/// because their output differs between standard library implementations.
class Rng
{
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed = 0)
    {
        std::uint64_t s = seed;
        for (auto& word : state_)
        {
            s = splitmix64(s);
            word = s;
        }
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()()
    {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    /// Uniform on (0, 1], safe to take the logarithm of.
    double uniform_open() { return 1.0 - uniform(); }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    bool bernoulli(double p) { return uniform() < p; }

    double exponential(double rate) { return -std::log(uniform_open()) / rate; }

    double normal()
    {
        if (has_spare_)
        {
            has_spare_ = false;
            return spare_;
        }
        const double r = std::sqrt(-2.0 * std::log(uniform_open()));
        const double phi = 2.0 * 3.14159265358979323846 * uniform();
        spare_ = r * std::sin(phi);
        has_spare_ = true;
        return r * std::cos(phi);
    }

    /// Speed of a particle leaving a thermal wall: p(s) ∝ s·exp(−m s²/2T).
    double flux_maxwell_speed(double temperature, double mass = 1.0)
    {
        return std::sqrt(-2.0 * temperature / mass * std::log(uniform_open()));
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::array<std::uint64_t, 4> state_{};
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace thermodemon
