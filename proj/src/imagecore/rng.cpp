#include "imagecore/rng.hpp"

#include <cmath>
#include <numbers>

#include "common/error.hpp"

namespace cuedecomp {

namespace {
constexpr std::uint64_t golden_gamma = 0x9E3779B97F4A7C15ull;
}

std::uint64_t fnv1a64(std::string_view bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char ch : bytes) {
        h ^= ch;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t z)
{
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

RngStream::RngStream(std::uint64_t master_seed, std::string_view item_key)
    : seed_(master_seed), key_(item_key), state_(splitmix64(master_seed ^ fnv1a64(item_key)))
{
}

std::uint64_t RngStream::next_u64()
{
    ++counter_;
    return splitmix64(state_ + counter_ * golden_gamma);
}

double RngStream::uniform()
{
    return double(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi)
{
    return lo + (hi - lo) * uniform();
}

std::uint64_t RngStream::below(std::uint64_t n)
{
    require(n > 0, Errc::invalid_argument, "below(0)");
    // Lemire's multiply-shift with rejection
    unsigned __int128 m = (unsigned __int128)next_u64() * n;
    auto low = std::uint64_t(m);
    if (low < n) {
        const std::uint64_t threshold = (0 - n) % n;
        while (low < threshold) {
            m = (unsigned __int128)next_u64() * n;
            low = std::uint64_t(m);
        }
    }
    return std::uint64_t(m >> 64);
}

std::int64_t RngStream::range(std::int64_t lo, std::int64_t hi)
{
    require(lo <= hi, Errc::invalid_argument, "empty range");
    auto span = std::uint64_t(hi - lo) + 1;
    if (span == 0) return std::int64_t(next_u64()); // full 64-bit range
    return lo + std::int64_t(below(span));
}

double RngStream::normal()
{
    // Box-Muller, one variate per call so the draw count stays predictable
    double u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

RngStream RngStream::substream(std::string_view suffix) const
{
    std::string k = key_;
    k += '/';
    k += suffix;
    return RngStream(seed_, k);
}

} // namespace cuedecomp
