#pragma once

#include <optional>
#include <string_view>

#include "srw/fragment.hpp"

namespace srw {

/// Strict mode declares a requirement implied at 0.75; expert mode uses a low
/// cutoff (0.5) and relies on the analyst to discard false positives.
enum class Mode { Strict, Expert };

inline constexpr double kStrictThreshold = 0.75;
inline constexpr double kExpertThreshold = 0.5;

inline double default_threshold(Mode mode) { return mode == Mode::Expert ? kExpertThreshold : kStrictThreshold; }

/// An explicit threshold always wins over the mode default.
inline double resolve_threshold(Mode mode, std::optional<double> explicit_threshold) {
  return explicit_threshold ? *explicit_threshold : default_threshold(mode);
}

std::optional<Mode> parse_mode(std::string_view s);
std::string_view to_string(Mode mode);

/// What a session does when agents oscillate.
enum class OnConflict {
  Halt,   // headless runs stop and mark the transcript
  Pause,  // interactive sessions wait for an operator decision
};

struct SessionConfig {
  double threshold = kStrictThreshold;
  Mode mode = Mode::Strict;
  double borderline_band = kDefaultBorderlineBand;
  bool batch_propagate = false;  // propagate once per round instead of per change
  int max_rounds = 50;
  OnConflict on_conflict = OnConflict::Halt;
};

}  // namespace srw
