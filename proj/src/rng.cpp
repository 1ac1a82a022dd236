#include "oshe/rng.hpp"

#include <cmath>

namespace oshe {

namespace {

constexpr std::uint32_t PHILOX_M0 = 0xD2511F53u;
constexpr std::uint32_t PHILOX_M1 = 0xCD9E8D57u;
constexpr std::uint32_t PHILOX_W0 = 0x9E3779B9u;
constexpr std::uint32_t PHILOX_W1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b,
                    std::uint32_t& hi, std::uint32_t& lo) {
    std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

inline std::array<std::uint32_t, 4> round_once(std::array<std::uint32_t, 4> c,
                                               const std::array<std::uint32_t, 2>& k) {
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(PHILOX_M0, c[0], hi0, lo0);
    mulhilo(PHILOX_M1, c[2], hi1, lo1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

} // namespace

PhiloxBlock philox4x32_raw(const std::array<std::uint32_t, 4>& counter,
                           const std::array<std::uint32_t, 2>& key) {
    std::array<std::uint32_t, 4> c = counter;
    std::array<std::uint32_t, 2> k = key;
    for (int r = 0; r < 10; ++r) {
        c = round_once(c, k);
        k[0] += PHILOX_W0;
        k[1] += PHILOX_W1;
    }
    return PhiloxBlock{c};
}

PhiloxBlock philox4x32(std::uint64_t seed, std::uint32_t stream,
                       std::uint32_t step, std::uint64_t block) {
    const std::array<std::uint32_t, 4> counter = {
        static_cast<std::uint32_t>(block),
        static_cast<std::uint32_t>(block >> 32),
        step,
        stream,
    };
    const std::array<std::uint32_t, 2> key = {
        static_cast<std::uint32_t>(seed),
        static_cast<std::uint32_t>(seed >> 32),
    };
    return philox4x32_raw(counter, key);
}

namespace {

// 53-bit uniform from two 32-bit words.
inline double to_unit(std::uint32_t hi, std::uint32_t lo) {
    std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32) | lo;
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

} // namespace

double uniform01(std::uint64_t seed, std::uint32_t stream,
                 std::uint32_t step, std::uint64_t block) {
    PhiloxBlock b = philox4x32(seed, stream, step, block);
    return to_unit(b.w[0], b.w[1]);
}

GaussPair gauss_pair(std::uint64_t seed, std::uint32_t stream,
                     std::uint32_t step, std::uint64_t block) {
    PhiloxBlock b = philox4x32(seed, stream, step, block);
    // u1 in (0,1] keeps the log finite; u2 in [0,1).
    double u1 = to_unit(b.w[0], b.w[1]) + 0x1.0p-53;
    double u2 = to_unit(b.w[2], b.w[3]);
    double r = std::sqrt(-2.0 * std::log(u1));
    double phi = 2.0 * M_PI * u2;
    return {r * std::cos(phi), r * std::sin(phi)};
}

} // namespace oshe
