#include "pinch/rng.hpp"

namespace pinch {

PhiloxCtr philox4x32(PhiloxCtr c, PhiloxKey k) {
    constexpr uint32_t M0 = 0xD2511F53, M1 = 0xCD9E8D57;
    constexpr uint32_t W0 = 0x9E3779B9, W1 = 0xBB67AE85;
    for (int round = 0; round < 10; ++round) {
        uint64_t p0 = static_cast<uint64_t>(M0) * c[0];
        uint64_t p1 = static_cast<uint64_t>(M1) * c[2];
        uint32_t hi0 = static_cast<uint32_t>(p0 >> 32), lo0 = static_cast<uint32_t>(p0);
        uint32_t hi1 = static_cast<uint32_t>(p1 >> 32), lo1 = static_cast<uint32_t>(p1);
        c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
        k[0] += W0;
        k[1] += W1;
    }
    return c;
}

}  // namespace pinch
