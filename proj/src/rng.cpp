#include "pblasso/rng.hpp"

namespace pblasso {

std::uint64_t splitmix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t key) : key_(key), engine_(splitmix64(key)) {}

RngStream RngStream::substream(std::uint64_t index) const
{
    return RngStream(splitmix64(key_ ^ splitmix64(index + 0x632be59bd9b4e019ULL)));
}

double RngStream::uniform()
{
    return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
}

double RngStream::normal() { return normal_(engine_); }

std::size_t RngStream::index(std::size_t n)
{
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_);
}

}  // namespace pblasso
