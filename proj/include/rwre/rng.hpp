#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace rwre
{

//---------------------------------------------------------------------------//
/*!
 * Philox4x32-10 counter-based generator.
 *
 * A pure function of (key, counter): the same pair always yields the same
 * 128 output bits, so random draws can be addressed by site or task index
 * instead of by position in a sequential stream.
 */
class Philox4x32
{
  public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static constexpr Counter apply(Counter ctr, Key key)
    {
        for (int round = 0; round < 10; ++round)
        {
            if (round > 0)
            {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            std::uint64_t const p0 = std::uint64_t{kMul0} * ctr[0];
            std::uint64_t const p1 = std::uint64_t{kMul1} * ctr[2];
            auto const hi0 = static_cast<std::uint32_t>(p0 >> 32);
            auto const lo0 = static_cast<std::uint32_t>(p0);
            auto const hi1 = static_cast<std::uint32_t>(p1 >> 32);
            auto const lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        }
        return ctr;
    }

  private:
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;
};

// SplitMix64 finalizer; used for keyed seed derivation.
constexpr std::uint64_t mix64(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

constexpr std::uint64_t fnv1a(std::string_view s)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (char c : s)
    {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

//! Child seed for a named purpose ("env", "walk", ...).
constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view name)
{
    return mix64(mix64(master) ^ fnv1a(name));
}

//! Child seed for the i-th task of a family.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index)
{
    return mix64(mix64(master ^ 0x5851f42d4c957f2dull) + mix64(index));
}

//---------------------------------------------------------------------------//
/*!
 * Stream of uniform doubles addressed by (seed, 96-bit label).
 *
 * The first counter word is the draw index; the remaining three words hold
 * the label (an encoded site or a task index).
 */
class CounterStream
{
  public:
    CounterStream(std::uint64_t seed, std::array<std::uint32_t, 3> label)
        : key_{static_cast<std::uint32_t>(seed),
               static_cast<std::uint32_t>(seed >> 32)}
        , label_(label)
    {
    }

    CounterStream(std::uint64_t seed, std::uint64_t index)
        : CounterStream(seed,
                        {static_cast<std::uint32_t>(index),
                         static_cast<std::uint32_t>(index >> 32),
                         0x7a5c0de5u})
    {
    }

    //! Next 64 random bits.
    std::uint64_t next_u64()
    {
        if (pos_ == 2)
        {
            refill();
        }
        return buffer_[pos_++];
    }

    //! Uniform on [0, 1) with 53-bit resolution.
    double uniform()
    {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    //! Uniform on [-1, 1).
    double symmetric() { return 2.0 * uniform() - 1.0; }

    //! Equiprobable ±1.
    int sign() { return (next_u64() >> 63) ? 1 : -1; }

  private:
    void refill()
    {
        auto const out = Philox4x32::apply(
            {draw_++, label_[0], label_[1], label_[2]}, key_);
        buffer_[0] = (std::uint64_t{out[0]} << 32) | out[1];
        buffer_[1] = (std::uint64_t{out[2]} << 32) | out[3];
        pos_ = 0;
    }

    Philox4x32::Key key_;
    std::array<std::uint32_t, 3> label_;
    std::uint32_t draw_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    int pos_ = 2;
};

}  // namespace rwre
