#pragma once

// Trend/seasonal decomposition of filtered factor paths and event studies on
// the standardized residuals.

#include "sdkim/types.hpp"

#include <string>
#include <vector>

namespace sdkim {

enum class DecompositionMode { multiplicative, additive };

std::string to_string(DecompositionMode mode);
DecompositionMode decomposition_mode_from_string(const std::string& name);

struct Event {
  Index time = 0;
  std::string label;
};

struct EventStudySpec {
  Index period = 2;      ///< seasonal period in steps
  Index bandwidth = 2;   ///< trend window in steps
  Index half_width = 1;  ///< event window is [-half_width, half_width]
  std::vector<Event> events;
  /// Segment start indices for per-segment standardization; empty means one
  /// segment. The first entry must be 0 when given.
  std::vector<Index> segment_starts;
  std::vector<DecompositionMode> modes;  ///< one per series; multiplicative if missing

  void validate() const;
};

struct Decomposition {
  Vector trend;     ///< NaN where the centered window is incomplete
  Vector seasonal;  ///< length T, periodic
  Vector residual;  ///< NaN at the edges
  Index first_valid = 0;
  Index last_valid = 0;  ///< inclusive
};

/// Centered moving average; an even bandwidth uses the 2 x m average with half
/// weights at both ends. Throws std::invalid_argument if the series is shorter
/// than two periods or than the window.
Decomposition decompose(const Vector& series, Index period, Index bandwidth, DecompositionMode mode);
Decomposition decompose(const Vector& series, const EventStudySpec& spec, DecompositionMode mode);

/// Subtract the mean and divide by the standard deviation within each segment,
/// ignoring NaN entries.
Vector standardize_segments(const Vector& series, const std::vector<Index>& segment_starts);

struct EventCurve {
  std::string label;  ///< empty for the pooled curve
  std::vector<Index> lag;
  Vector mean;
  double band = 0.0;  ///< +/- half-width of the 95% band under the unit-variance null
  Index events_used = 0;
  Index events_dropped = 0;
};

/// Averages standardized residuals across events for each lag. Events whose
/// window leaves the valid range (or touches a NaN) are dropped and counted.
/// Throws std::invalid_argument if no event survives.
EventCurve event_study(const Vector& standardized, const std::vector<Event>& events, Index half_width);

/// Pooled curve followed by one curve per distinct label (sorted by label).
std::vector<EventCurve> event_study_by_label(const Vector& standardized, const std::vector<Event>& events,
                                             Index half_width);

/// Raw periodogram |sum_t x_t e^{-2 pi i k t / T}|^2 / T for k = 1..T/2 on the
/// demeaned series. Returns (frequency in cycles per step, power).
std::vector<std::pair<double, double>> periodogram(const Vector& series);

/// Period (in steps) of the strongest periodogram component.
double dominant_period(const Vector& series);

}  // namespace sdkim
