#ifndef LSV_RNG_HPP
#define LSV_RNG_HPP

#include <cstdint>

namespace lsv {

// Counter-based generator: SplitMix64 applied to (seed, stream, counter).
// Every particle owns its own stream, so results are independent of
// evaluation order and thread count. Algorithm identifier recorded in
// output provenance: "splitmix64-counter-v1".
inline constexpr const char* kRngId = "splitmix64-counter-v1";

inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream)
        : state_(splitmix64(seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1)))) {}

    std::uint64_t next_u64() {
        state_ = splitmix64(state_);
        return state_;
    }

    // Uniform in [0,1), 53-bit resolution.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

private:
    std::uint64_t state_;
};

} // namespace lsv

#endif
