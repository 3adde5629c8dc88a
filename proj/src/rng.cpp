#include "spdetaylor/rng.hpp"

#include <cmath>
#include <numbers>

namespace spdetaylor
{
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key)
{
    constexpr std::uint64_t m0 = 0xD2511F53u, m1 = 0xCD9E8D57u;
    for (int round = 0; round < 10; ++round)
    {
        if (round)
        {
            key[0] += 0x9E3779B9u;
            key[1] += 0xBB67AE85u;
        }
        std::uint64_t p0 = m0 * ctr[0];
        std::uint64_t p1 = m1 * ctr[2];
        ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0],
               static_cast<std::uint32_t>(p1),
               static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1],
               static_cast<std::uint32_t>(p0)};
    }
    return ctr;
}

void NormalStream::fill(std::uint32_t step, std::uint32_t mode, std::span<double> out) const
{
    std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(seed_),
                                     static_cast<std::uint32_t>(seed_ >> 32)};
    std::uint32_t tag = static_cast<std::uint32_t>(tag_) << 24;
    for (std::size_t k = 0; k < out.size(); k += 2)
    {
        auto block = static_cast<std::uint32_t>(k / 2);
        auto r = philox4x32({block | tag, mode, step, path_}, key);
        double u1 = unit_interval((std::uint64_t(r[0]) << 32) | r[1]);
        double u2 = unit_interval((std::uint64_t(r[2]) << 32) | r[3]);
        double radius = std::sqrt(-2 * std::log(u1));
        double angle = 2 * std::numbers::pi * u2;
        out[k] = radius * std::cos(angle);
        if (k + 1 < out.size())
            out[k + 1] = radius * std::sin(angle);
    }
}
}  // namespace spdetaylor
