#ifndef HSIBAND_RANDOM_HPP
#define HSIBAND_RANDOM_HPP

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace hsiband {

// std::uniform_int_distribution and std::shuffle are implementation-defined,
// so everything seeded goes through these helpers to keep results identical
// across standard libraries.

using rng_engine = std::mt19937_64;

/// splitmix64 finalizer; maps (base, stream) to a well-mixed child seed.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept {
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Uniform integer in [0, bound) by rejection sampling.
inline std::uint64_t uniform_index(rng_engine& rng, std::uint64_t bound) {
    if (bound <= 1) return 0;
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
    std::uint64_t draw;
    do {
        draw = rng();
    } while (draw >= limit);
    return draw % bound;
}

template <class T>
void shuffle(std::span<T> items, rng_engine& rng) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(uniform_index(rng, i));
        std::swap(items[i - 1], items[j]);
    }
}

/// 64-bit FNV-1a, used to fingerprint datasets in reports.
class fnv1a64 {
public:
    void update(const void* data, std::size_t size) noexcept {
        const auto* bytes = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < size; ++i) {
            state_ ^= bytes[i];
            state_ *= 0x100000001b3ULL;
        }
    }
    template <class T>
    void update(std::span<const T> values) noexcept {
        update(values.data(), values.size_bytes());
    }
    std::uint64_t digest() const noexcept { return state_; }

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace hsiband

#endif  // HSIBAND_RANDOM_HPP
