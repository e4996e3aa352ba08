#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

#include <Eigen/Core>

namespace tvvar {

// Counter-based random stream: draw k of stream s under seed is a pure
// function of (seed, s, k), so independent streams can be generated in any
// order (or in parallel) and still reproduce bit-for-bit.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed, std::uint64_t stream = 0) noexcept
        : seed_(seed), stream_(stream) {}

    // Child stream keyed by `id`; does not advance this stream.
    RandomStream split(std::uint64_t id) const noexcept {
        return RandomStream(seed_, mix(stream_ + 0x632be59bd9b4e019ULL * (id + 1)));
    }

    std::uint64_t next_u64() noexcept {
        return mix(seed_ ^ mix(stream_ ^ mix(counter_++)));
    }

    // Uniform on the open interval (0, 1).
    double uniform() noexcept {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Standard normal via Box-Muller (cosine branch only, so each draw
    // consumes exactly two counters).
    double normal() noexcept {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

    template <class Scalar = double>
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> normal_matrix(Eigen::Index rows,
                                                                        Eigen::Index cols) {
        Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(rows, cols);
        for (Eigen::Index j = 0; j < cols; ++j)
            for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = static_cast<Scalar>(normal());
        return out;
    }

    std::uint64_t counter() const noexcept { return counter_; }

private:
    // splitmix64 finalizer
    static std::uint64_t mix(std::uint64_t z) noexcept {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
};

} // namespace tvvar
