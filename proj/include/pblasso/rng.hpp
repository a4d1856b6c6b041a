#pragma once

#include <cstdint>
#include <random>

namespace pblasso {

/// One step of the splitmix64 output function.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/**
 * Seeded random stream with deterministic, counter-based substreams.
 *
 * A stream is identified by a 64-bit key. `substream(i)` derives the key of
 * child `i` by hashing (key, i) through splitmix64, so the child sequence
 * depends only on the parent key and the index, never on how many values the
 * parent has consumed or on which thread asks for it. Bootstrap replicate `b`
 * always draws from `stream.substream(b)`, which is what keeps results
 * identical across thread counts.
 */
class RngStream {
public:
    using engine_type = std::mt19937_64;

    explicit RngStream(std::uint64_t key);

    std::uint64_t key() const noexcept { return key_; }
    RngStream substream(std::uint64_t index) const;

    engine_type& engine() noexcept { return engine_; }

    double uniform();         // [0, 1)
    double normal();          // N(0, 1)
    std::size_t index(std::size_t n);  // uniform on {0, ..., n-1}

private:
    std::uint64_t key_;
    engine_type engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace pblasso
