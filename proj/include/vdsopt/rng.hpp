#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace vdsopt {

struct RngSeed {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
};

namespace detail {

inline constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace detail

// Derives a substream identifier from a tuple of integers, e.g. (arm, m, trial).
inline std::uint64_t derive_stream(std::initializer_list<std::uint64_t> parts) noexcept
{
    std::uint64_t h = 0x243F6A8885A308D3ULL;
    for (auto v : parts) h = detail::mix64(h ^ detail::mix64(v + 0x9E3779B97F4A7C15ULL));
    return h;
}

// Counter-based generator: draw k of substream (seed, stream) is a pure
// function of (seed, stream, k). Models UniformRandomBitGenerator.
class CounterRng {
public:
    using result_type = std::uint64_t;

    explicit CounterRng(RngSeed s) noexcept
        : key_(detail::mix64(s.seed ^ detail::mix64(s.stream ^ 0xD1B54A32D192ED03ULL)))
    {
    }

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept
    {
        return detail::mix64(key_ + 0x9E3779B97F4A7C15ULL * ++counter_);
    }

    // Uniform on [0, 1).
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    // Uniform on (0, 1].
    double uniform_open_closed() noexcept { return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53; }

    // Uniform integer in [0, n), n > 0, by rejection.
    std::uint64_t below(std::uint64_t n) noexcept
    {
        const std::uint64_t limit = max() - max() % n;
        std::uint64_t r;
        do {
            r = (*this)();
        } while (r >= limit);
        return r % n;
    }

    std::uint64_t counter() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace vdsopt
