#include "soar/core/rng.hpp"

#include <bit>
#include <sstream>

namespace soar {

std::string Rng::save_state() const {
  // The cached Box-Muller draw is stored as raw bits; text round-trips of
  // doubles are not reliably exact.
  std::ostringstream os;
  os << engine_ << ' ' << (have_cached_ ? 1 : 0) << ' '
     << std::bit_cast<std::uint64_t>(cached_);
  return os.str();
}

void Rng::load_state(const std::string& text) {
  std::istringstream is(text);
  is >> engine_;
  int flag = 0;
  std::uint64_t bits = 0;
  is >> flag >> bits;
  have_cached_ = flag != 0;
  cached_ = std::bit_cast<double>(bits);
}

std::uint64_t Rng::derive_seed(std::uint64_t base, const std::string& tag) {
  // FNV-1a over the tag, mixed with the base seed.
  std::uint64_t h = 14695981039346656037ull ^ base;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 1099511628211ull;
  }
  h ^= h >> 33;
  h *= 0xff51afd7ed558ccdull;
  h ^= h >> 33;
  return h;
}

}  // namespace soar
