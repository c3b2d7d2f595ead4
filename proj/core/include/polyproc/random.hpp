#pragma once

#include <array>
#include <cstdint>

namespace polyproc {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter block(Counter counter, Key key);
};

/// Stream domains keep the simulators' random numbers disjoint.
enum class StreamDomain : std::uint32_t { Diffusion = 1, Spectral = 2 };

/// Standard normal variates addressed by (seed, stream, index): the same
/// address always gives the same number, independent of evaluation order.
class NormalStream {
public:
    NormalStream(std::uint64_t seed, std::uint64_t stream, StreamDomain domain);

    /// Two independent normals for pair index k (Box-Muller on one Philox block).
    std::array<double, 2> pair(std::uint64_t k) const;
    double normal(std::uint64_t index) const { return pair(index / 2)[index % 2]; }

    /// Uniform in (0, 1) from the high 52 bits of a 64-bit word.
    static double to_unit(std::uint32_t hi, std::uint32_t lo);

private:
    Philox4x32::Key key_;
    std::uint64_t stream_;
};

}  // namespace polyproc
