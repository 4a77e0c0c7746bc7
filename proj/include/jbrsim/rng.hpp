#pragma once

#include <cstdint>
#include <random>

namespace jbrsim {

// splitmix64 step, used to derive independent stream seeds from one run seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Named substreams keep mobility, traffic placement and traffic timing
// decoupled: a protocol never draws from these, so two protocols given the
// same seed see identical node motion and identical packet arrivals.
enum class RngStream : std::uint64_t {
    Mobility = 1,
    TrafficLayout = 2,
    TrafficTiming = 3,
};

inline std::mt19937_64 make_stream(std::uint64_t run_seed, RngStream which) {
    std::uint64_t s = run_seed ^ (0xa0761d6478bd642full * static_cast<std::uint64_t>(which));
    // a few warmup mixes so nearby run seeds do not produce nearby states
    splitmix64(s);
    const std::uint64_t a = splitmix64(s);
    const std::uint64_t b = splitmix64(s);
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    return std::mt19937_64(seq);
}

} // namespace jbrsim
