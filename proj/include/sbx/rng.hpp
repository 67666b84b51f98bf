#pragma once

#include <cmath>
#include <cstdint>

#include <boost/random/exponential_distribution.hpp>
#include <boost/random/normal_distribution.hpp>

namespace sbx
{
//! SplitMix64, used only to seed streams.
class SplitMix64
{
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t operator()()
    {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

  private:
    std::uint64_t state_;
};

/*!
 * xoshiro256++ stream. Streams for (seed, index) pairs are derived by
 * hashing both through SplitMix64, so replica i always sees the same draws.
 */
class RngStream
{
  public:
    RngStream(std::uint64_t seed, std::uint64_t stream)
    {
        SplitMix64 outer(seed);
        std::uint64_t key = outer() ^ SplitMix64(stream ^ 0x5851f42d4c957f2dULL)();
        SplitMix64 sm(key);
        for (auto& w : s_)
            w = sm();
    }

    std::uint64_t next()
    {
        std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    //! Uniform on [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    //! Uniform on (0, 1].
    double uniform_pos() { return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53; }

    //! Uniform integer in [0, n).
    std::uint64_t index(std::uint64_t n)
    {
        return static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
    }

    // URBG interface so Boost's ziggurat samplers can draw from the stream
    using result_type = std::uint64_t;
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type(0); }
    result_type operator()() { return next(); }

    double exponential(double rate)
    {
        return boost::random::exponential_distribution<double>(rate)(*this);
    }

    double normal() { return boost::random::normal_distribution<double>()(*this); }

    std::uint64_t poisson(double mean);

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t s_[4];
};

}  // namespace sbx
