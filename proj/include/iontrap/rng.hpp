// Deterministic random streams. Every shot owns a stream derived only from
// (master seed, setting index, shot index), so results do not depend on how
// shots are scheduled across workers.
#pragma once

#include <cstdint>
#include <limits>

namespace iontrap {

/// SplitMix64 finalizer: a bijective 64-bit mixing function.
std::uint64_t mix64(std::uint64_t x);

/// Small counter-based generator (SplitMix64). Cheap to construct per shot and
/// usable with the <random> distributions.
class ShotEngine {
 public:
  using result_type = std::uint64_t;

  explicit ShotEngine(std::uint64_t state) : state_(state) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform();

 private:
  std::uint64_t state_;
};

/// Stream identifier for one shot.
std::uint64_t stream_id(std::uint64_t master_seed, std::uint64_t setting_index,
                        std::uint64_t shot_index);

// Tags for streams that are not tied to a measurement shot.
enum class AuxStream : std::uint64_t {
  kPhaseJitter = 1,
  kDephasing = 2,
  kReadoutCheck = 3,
};

struct RngPlan {
  std::uint64_t master_seed = 0;

  std::uint64_t shot_stream(std::uint64_t setting_index, std::uint64_t shot_index) const {
    return stream_id(master_seed, setting_index, shot_index);
  }
  ShotEngine shot_engine(std::uint64_t setting_index, std::uint64_t shot_index) const {
    return ShotEngine(shot_stream(setting_index, shot_index));
  }
  /// Stream for auxiliary draws; disjoint from shot streams by construction of
  /// the hash input (the tag occupies the high bits of the setting word).
  ShotEngine aux_engine(AuxStream tag, std::uint64_t index) const;
};

}  // namespace iontrap
