#include "iontrap/rng.hpp"

namespace iontrap {

std::uint64_t mix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

ShotEngine::result_type ShotEngine::operator()() {
  state_ += 0x9e3779b97f4a7c15ULL;
  return mix64(state_);
}

double ShotEngine::uniform() {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

std::uint64_t stream_id(std::uint64_t master_seed, std::uint64_t setting_index,
                        std::uint64_t shot_index) {
  std::uint64_t h = mix64(master_seed ^ 0x6a09e667f3bcc909ULL);
  h = mix64(h ^ setting_index);
  return mix64(h + 0x9e3779b97f4a7c15ULL * (shot_index + 1));
}

ShotEngine RngPlan::aux_engine(AuxStream tag, std::uint64_t index) const {
  const auto setting = (static_cast<std::uint64_t>(tag) << 56) | 0x00ffffffffffff00ULL;
  return ShotEngine(stream_id(master_seed, setting, index));
}

}  // namespace iontrap
