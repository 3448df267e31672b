#pragma once

#include <array>
#include <cstdint>

namespace gelfand {

/// Philox4x32-10 block function (Salmon et al., Random123).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

/// Stateless keyed stream: value i depends only on (seed, stream, i), so
/// draws are independent of evaluation order and scheduling.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

    /// Uniform in (0, 1) from counter i.
    double uniform(std::uint64_t i) const;
    /// Standard normal from counter i (Box–Muller on a single Philox block).
    double normal(std::uint64_t i) const;

    /// Sequential helpers advancing an internal cursor.
    double next_uniform() { return uniform(cursor_++); }
    double next_normal() { return normal(cursor_++); }

private:
    std::array<std::uint32_t, 4> block(std::uint64_t i) const;

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t cursor_ = 0;
};

}  // namespace gelfand
