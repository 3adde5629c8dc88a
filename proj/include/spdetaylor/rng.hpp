#pragma once

#include <array>
#include <cstdint>
#include <span>

namespace spdetaylor
{
//! Philox4x32-10 block function.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key);

//! Independent streams are selected by the purpose tag.
enum class StreamTag : std::uint32_t
{
    Exact = 1,
    Aggregate = 2,
    Test = 3,
};

/*!
 * Counter-based normal generator.
 *
 * A stream is addressed by (seed, path, step, mode, tag); the values are a pure
 * function of that address, independent of call order or thread.
 */
class NormalStream
{
  public:
    NormalStream(std::uint64_t seed, std::uint32_t path, StreamTag tag = StreamTag::Exact)
        : seed_(seed), path_(path), tag_(tag)
    {
    }

    void fill(std::uint32_t step, std::uint32_t mode, std::span<double> out) const;

    std::uint64_t seed() const { return seed_; }
    std::uint32_t path() const { return path_; }

  private:
    std::uint64_t seed_;
    std::uint32_t path_;
    StreamTag tag_;
};

//! Map 64 random bits to (0, 1].
inline double unit_interval(std::uint64_t bits)
{
    return (static_cast<double>(bits >> 11) + 1.0) * 0x1.0p-53;
}
}  // namespace spdetaylor
