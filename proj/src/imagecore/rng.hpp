#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace cuedecomp {

std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t splitmix64(std::uint64_t x);

// Counter-based stream: draw i is a pure function of (seed, key, i), so the
// sequence does not depend on which thread asks or in what order items run.
class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::string_view item_key);

    std::uint64_t master_seed() const { return seed_; }
    const std::string& item_key() const { return key_; }
    std::uint64_t position() const { return counter_; }

    std::uint64_t next_u64();
    double uniform();                                   // [0,1)
    double uniform(double lo, double hi);               // [lo,hi)
    std::uint64_t below(std::uint64_t n);               // [0,n), unbiased
    std::int64_t range(std::int64_t lo, std::int64_t hi); // [lo,hi] inclusive
    double normal();

    RngStream substream(std::string_view suffix) const;

private:
    std::uint64_t seed_;
    std::string key_;
    std::uint64_t state_;
    std::uint64_t counter_ = 0;
};

inline RngStream derive_stream(std::uint64_t master_seed, std::string_view item_key)
{
    return RngStream(master_seed, item_key);
}

} // namespace cuedecomp
