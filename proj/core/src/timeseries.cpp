#include "sdkim/timeseries.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <numbers>
#include <stdexcept>

namespace sdkim {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

std::string to_string(DecompositionMode mode) {
  return mode == DecompositionMode::multiplicative ? "multiplicative" : "additive";
}

DecompositionMode decomposition_mode_from_string(const std::string& name) {
  if (name == "multiplicative") return DecompositionMode::multiplicative;
  if (name == "additive") return DecompositionMode::additive;
  throw std::invalid_argument("unknown decomposition mode: " + name);
}

void EventStudySpec::validate() const {
  if (period < 2) throw std::invalid_argument("EventStudySpec: period must be at least 2");
  if (bandwidth < 1) throw std::invalid_argument("EventStudySpec: bandwidth must be at least 1");
  if (half_width < 1) throw std::invalid_argument("EventStudySpec: window half-width must be at least 1");
  if (!segment_starts.empty()) {
    if (segment_starts.front() != 0) throw std::invalid_argument("EventStudySpec: first segment must start at 0");
    if (!std::is_sorted(segment_starts.begin(), segment_starts.end()) ||
        std::adjacent_find(segment_starts.begin(), segment_starts.end()) != segment_starts.end()) {
      throw std::invalid_argument("EventStudySpec: segment starts must be strictly increasing");
    }
  }
}

Decomposition decompose(const Vector& series, Index period, Index bandwidth, DecompositionMode mode) {
  const Index T = series.size();
  if (period < 2) throw std::invalid_argument("decompose: period must be at least 2");
  if (bandwidth < 1) throw std::invalid_argument("decompose: bandwidth must be at least 1");
  if (!series.allFinite()) throw std::invalid_argument("decompose: series has non-finite values");
  const Index half = bandwidth / 2;
  const Index window = bandwidth % 2 == 0 ? bandwidth + 1 : bandwidth;
  if (T < 2 * period) throw std::invalid_argument("decompose: series shorter than two periods");
  if (T < window + period - 1) throw std::invalid_argument("decompose: series shorter than the trend window");

  Decomposition d;
  d.first_valid = half;
  d.last_valid = T - 1 - half;
  d.trend = Vector::Constant(T, kNaN);
  d.residual = Vector::Constant(T, kNaN);
  const double inv = 1.0 / static_cast<double>(bandwidth);
  for (Index t = d.first_valid; t <= d.last_valid; ++t) {
    double sum = series.segment(t - half, window).sum();
    if (bandwidth % 2 == 0) sum -= 0.5 * (series(t - half) + series(t + half));
    d.trend(t) = sum * inv;
  }
  const bool mult = mode == DecompositionMode::multiplicative;
  if (mult && (d.trend.segment(d.first_valid, d.last_valid - d.first_valid + 1).array() <= 0.0).any()) {
    throw std::invalid_argument("decompose: multiplicative mode needs a positive trend");
  }

  Vector phase_sum = Vector::Zero(period);
  Vector phase_count = Vector::Zero(period);
  for (Index t = d.first_valid; t <= d.last_valid; ++t) {
    const double detrended = mult ? series(t) / d.trend(t) : series(t) - d.trend(t);
    phase_sum(t % period) += detrended;
    phase_count(t % period) += 1.0;
  }
  if ((phase_count.array() == 0.0).any()) throw std::invalid_argument("decompose: some phase has no interior point");
  Vector phase = phase_sum.cwiseQuotient(phase_count);
  if (mult) phase /= phase.mean();
  else phase.array() -= phase.mean();

  d.seasonal.resize(T);
  for (Index t = 0; t < T; ++t) d.seasonal(t) = phase(t % period);
  for (Index t = d.first_valid; t <= d.last_valid; ++t) {
    d.residual(t) = mult ? series(t) / (d.seasonal(t) * d.trend(t)) : series(t) - d.seasonal(t) - d.trend(t);
  }
  return d;
}

Decomposition decompose(const Vector& series, const EventStudySpec& spec, DecompositionMode mode) {
  spec.validate();
  return decompose(series, spec.period, spec.bandwidth, mode);
}

Vector standardize_segments(const Vector& series, const std::vector<Index>& segment_starts) {
  std::vector<Index> starts = segment_starts.empty() ? std::vector<Index>{0} : segment_starts;
  if (starts.front() != 0) throw std::invalid_argument("standardize_segments: first segment must start at 0");
  starts.push_back(series.size());
  Vector out = Vector::Constant(series.size(), kNaN);
  for (std::size_t s = 0; s + 1 < starts.size(); ++s) {
    const Index a = starts[s], b = starts[s + 1];
    if (b <= a || b > series.size()) throw std::invalid_argument("standardize_segments: bad segment bounds");
    double sum = 0.0, sq = 0.0;
    Index n = 0;
    for (Index t = a; t < b; ++t) {
      if (std::isfinite(series(t))) {
        sum += series(t);
        ++n;
      }
    }
    if (n < 2) continue;
    const double mean = sum / static_cast<double>(n);
    for (Index t = a; t < b; ++t) {
      if (std::isfinite(series(t))) sq += (series(t) - mean) * (series(t) - mean);
    }
    const double sd = std::sqrt(sq / static_cast<double>(n - 1));
    if (!(sd > 0.0)) continue;
    for (Index t = a; t < b; ++t) {
      if (std::isfinite(series(t))) out(t) = (series(t) - mean) / sd;
    }
  }
  return out;
}

EventCurve event_study(const Vector& standardized, const std::vector<Event>& events, Index half_width) {
  if (half_width < 1) throw std::invalid_argument("event_study: window half-width must be at least 1");
  const Index T = standardized.size();
  const Index width = 2 * half_width + 1;
  EventCurve curve;
  curve.mean = Vector::Zero(width);
  for (Index l = -half_width; l <= half_width; ++l) curve.lag.push_back(l);
  for (const Event& e : events) {
    const Index a = e.time - half_width, b = e.time + half_width;
    if (a < 0 || b >= T || !standardized.segment(a, width).allFinite()) {
      ++curve.events_dropped;
      continue;
    }
    curve.mean += standardized.segment(a, width);
    ++curve.events_used;
  }
  if (curve.events_used == 0) throw std::invalid_argument("event_study: no event has a complete window");
  curve.mean /= static_cast<double>(curve.events_used);
  curve.band = 1.96 / std::sqrt(static_cast<double>(curve.events_used));
  return curve;
}

std::vector<EventCurve> event_study_by_label(const Vector& standardized, const std::vector<Event>& events,
                                             Index half_width) {
  std::vector<EventCurve> out{event_study(standardized, events, half_width)};
  std::map<std::string, std::vector<Event>> groups;
  for (const Event& e : events) groups[e.label].push_back(e);
  if (groups.size() < 2) return out;
  for (const auto& [label, subset] : groups) {
    EventCurve c;
    try {
      c = event_study(standardized, subset, half_width);
    } catch (const std::invalid_argument&) {
      c.lag = out.front().lag;
      c.mean = Vector::Constant(2 * half_width + 1, kNaN);
      c.band = kNaN;
      c.events_dropped = static_cast<Index>(subset.size());
    }
    c.label = label;
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<std::pair<double, double>> periodogram(const Vector& series) {
  const Index T = series.size();
  if (T < 4 || !series.allFinite()) throw std::invalid_argument("periodogram: need at least 4 finite values");
  const Vector x = series.array() - series.mean();
  std::vector<std::pair<double, double>> out;
  for (Index k = 1; k <= T / 2; ++k) {
    std::complex<double> acc{0.0, 0.0};
    const double w = -2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(T);
    for (Index t = 0; t < T; ++t) acc += x(t) * std::polar(1.0, w * static_cast<double>(t));
    out.emplace_back(static_cast<double>(k) / static_cast<double>(T), std::norm(acc) / static_cast<double>(T));
  }
  return out;
}

double dominant_period(const Vector& series) {
  const auto p = periodogram(series);
  const auto best = std::max_element(p.begin(), p.end(), [](auto& a, auto& b) { return a.second < b.second; });
  return 1.0 / best->first;
}

}  // namespace sdkim
