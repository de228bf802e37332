#pragma once

#include <array>
#include <cstdint>

namespace pinch {

// Philox4x32-10 counter-based generator.
using PhiloxCtr = std::array<uint32_t, 4>;
using PhiloxKey = std::array<uint32_t, 2>;
PhiloxCtr philox4x32(PhiloxCtr ctr, PhiloxKey key);

// Random bits keyed by (seed, stream, block): stream identifies a sample or a
// chain sweep, block a group of 128 decisions within it.
class CounterRng {
public:
    explicit CounterRng(uint64_t seed, uint64_t stream = 0)
        : key_{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32)}, stream_(stream) {}

    PhiloxCtr block(uint64_t index) const {
        return philox4x32({static_cast<uint32_t>(index), static_cast<uint32_t>(index >> 32),
                           static_cast<uint32_t>(stream_), static_cast<uint32_t>(stream_ >> 32)},
                          key_);
    }
    // 32-bit word number i of the stream
    uint32_t word(uint64_t i) const { return block(i >> 2)[i & 3]; }
    // uniform in [0,1) with 53 bits, from words 2i and 2i+1
    double uniform(uint64_t i) const {
        PhiloxCtr b = block(i >> 1);
        int o = static_cast<int>(i & 1) * 2;
        uint64_t v = (static_cast<uint64_t>(b[o]) << 32) | b[o + 1];
        return static_cast<double>(v >> 11) * 0x1.0p-53;
    }
    bool bit(uint64_t i) const { return (block(i >> 7)[(i >> 5) & 3] >> (i & 31)) & 1u; }

private:
    PhiloxKey key_;
    uint64_t stream_;
};

}  // namespace pinch
