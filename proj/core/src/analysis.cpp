#include "pilotrt/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>

#include "pilotrt/errors.hpp"
#include "pilotrt/states.hpp"

namespace pilotrt {

namespace {

bool is_agent_event(const ProfileEvent& e) {
  return e.component.rfind("agent", 0) == 0;
}

bool is_state_label(const std::string& label) {
  return unit_state_from_string(label).has_value();
}

// Per-unit view of the (already time-sorted) event list.
struct UnitTrace {
  std::vector<const ProfileEvent*> agent_events;  // all agent-side events
  std::vector<const ProfileEvent*> state_events;  // unit state transitions
  std::optional<int64_t> assign_us, release_us, exec_start_us, exec_stop_us;
  int cores = 1;
};

std::map<std::string, UnitTrace> collect_unit_traces(
    const std::vector<ProfileEvent>& events) {
  std::map<std::string, UnitTrace> traces;
  for (const auto& e : events) {
    if (e.uid.empty() || !is_agent_event(e)) continue;
    UnitTrace& t = traces[e.uid];
    t.agent_events.push_back(&e);
    if (is_state_label(e.label)) {
      t.state_events.push_back(&e);
    } else if (e.label == "assign") {
      t.assign_us = e.ts_mono_us;
      if (!e.detail.empty()) t.cores = std::max(1, std::atoi(e.detail.c_str()));
    } else if (e.label == "release") {
      t.release_us = e.ts_mono_us;
    } else if (e.label == "exec_start") {
      t.exec_start_us = e.ts_mono_us;
    } else if (e.label == "exec_stop") {
      t.exec_stop_us = e.ts_mono_us;
    }
  }
  return traces;
}

// Timestamp of the state event following `state`, if any.
std::optional<int64_t> ts_after_state(const UnitTrace& t, UnitState state) {
  for (size_t i = 0; i < t.state_events.size(); ++i) {
    if (unit_state_from_string(t.state_events[i]->label) == state) {
      if (i + 1 < t.state_events.size())
        return t.state_events[i + 1]->ts_mono_us;
      return std::nullopt;
    }
  }
  return std::nullopt;
}

std::optional<int64_t> ts_of_state(const UnitTrace& t, UnitState state) {
  for (const auto* e : t.state_events)
    if (unit_state_from_string(e->label) == state) return e->ts_mono_us;
  return std::nullopt;
}

// [enter A_EXECUTING, leave A_EXECUTING] if the unit executed at all.
std::optional<std::pair<int64_t, int64_t>> executing_interval(
    const UnitTrace& t) {
  auto start = ts_of_state(t, UnitState::A_EXECUTING);
  if (!start) return std::nullopt;
  auto end = ts_after_state(t, UnitState::A_EXECUTING);
  int64_t end_us = end ? *end : t.agent_events.back()->ts_mono_us;
  return std::make_pair(*start, end_us);
}

}  // namespace

int64_t compute_ttc_a_us(const std::vector<ProfileEvent>& events) {
  auto traces = collect_unit_traces(events);
  bool any = false;
  int64_t first_in = 0, last_out = 0;
  for (const auto& [uid, t] : traces) {
    if (t.agent_events.empty()) continue;
    int64_t ingress = t.agent_events.front()->ts_mono_us;
    if (auto ts = ts_of_state(t, UnitState::A_STAGING_IN)) ingress = *ts;
    int64_t egress = t.agent_events.back()->ts_mono_us;
    if (auto ts = ts_after_state(t, UnitState::A_STAGING_OUT)) egress = *ts;
    if (!any || ingress < first_in) first_in = ingress;
    if (!any || egress > last_out) last_out = egress;
    any = true;
  }
  if (!any) throw EmptyLog();
  return last_out - first_in;
}

double compute_ttc_a_s(const std::vector<ProfileEvent>& events) {
  return static_cast<double>(compute_ttc_a_us(events)) / 1e6;
}

double compute_utilization(const std::vector<ProfileEvent>& events,
                           int pilot_cores) {
  int64_t ttc_a = compute_ttc_a_us(events);
  if (ttc_a <= 0 || pilot_cores <= 0) return 0.0;
  auto traces = collect_unit_traces(events);
  int64_t busy_us = 0;
  for (const auto& [uid, t] : traces) {
    auto iv = executing_interval(t);
    if (!iv) continue;
    busy_us += static_cast<int64_t>(t.cores) * (iv->second - iv->first);
  }
  return static_cast<double>(busy_us) /
         (static_cast<double>(pilot_cores) * static_cast<double>(ttc_a));
}

std::vector<SeriesPoint> concurrency_series(
    const std::vector<ProfileEvent>& events) {
  auto traces = collect_unit_traces(events);
  std::map<int64_t, int> deltas;
  for (const auto& [uid, t] : traces) {
    auto iv = executing_interval(t);
    if (!iv) continue;
    deltas[iv->first] += 1;
    deltas[iv->second] -= 1;
  }
  std::vector<SeriesPoint> series;
  series.reserve(deltas.size());
  int level = 0;
  for (const auto& [t, d] : deltas) {
    level += d;
    series.push_back({t, static_cast<double>(level)});
  }
  return series;
}

std::vector<SeriesPoint> throughput_series(
    const std::vector<ProfileEvent>& events, std::string_view component,
    int64_t window_us) {
  std::vector<int64_t> stamps;
  for (const auto& e : events) {
    if (e.component != component) continue;
    if (e.label == "put" || e.label == "drop" || e.label == "final")
      stamps.push_back(e.ts_mono_us);
  }
  std::vector<SeriesPoint> series;
  if (stamps.empty() || window_us <= 0) return series;
  std::sort(stamps.begin(), stamps.end());
  const int64_t t0 = stamps.front();
  const size_t n_windows = (stamps.back() - t0) / window_us + 1;
  std::vector<size_t> counts(n_windows, 0);
  for (int64_t ts : stamps) counts[(ts - t0) / window_us] += 1;
  series.reserve(n_windows);
  for (size_t w = 0; w < n_windows; ++w) {
    series.push_back({t0 + static_cast<int64_t>(w) * window_us,
                      static_cast<double>(counts[w]) * 1e6 / window_us});
  }
  return series;
}

RateSummary summarize_component_rate(const std::vector<ProfileEvent>& events,
                                     std::string_view component) {
  std::vector<int64_t> stamps;
  for (const auto& e : events) {
    if (e.component != component) continue;
    if (e.label == "put" || e.label == "drop" || e.label == "final")
      stamps.push_back(e.ts_mono_us);
  }
  RateSummary s;
  if (stamps.empty()) return s;
  std::sort(stamps.begin(), stamps.end());
  s.count = stamps.size();
  s.span_us = stamps.back() - stamps.front();
  if (s.span_us <= 0) {
    s.mean_per_s = static_cast<double>(s.count);
    return s;
  }
  // Window size adapts to the run: aim for ~12 windows, between 1 ms and 1 s.
  int64_t window = std::clamp<int64_t>(s.span_us / 12, 1000, 1000000);
  auto series = throughput_series(events, component, window);
  // Drop the warm-up window and the trailing partial window.
  std::vector<double> rates;
  for (size_t i = 1; i + 1 < series.size(); ++i)
    rates.push_back(series[i].value);
  if (rates.size() < 2) {
    s.mean_per_s = static_cast<double>(s.count) * 1e6 / s.span_us;
    s.windows = static_cast<int>(rates.size());
    return s;
  }
  double mean = 0;
  for (double r : rates) mean += r;
  mean /= rates.size();
  double var = 0;
  for (double r : rates) var += (r - mean) * (r - mean);
  var /= rates.size();
  s.mean_per_s = mean;
  s.stdev_per_s = std::sqrt(var);
  s.cv = mean > 0 ? s.stdev_per_s / mean : 0.0;
  s.windows = static_cast<int>(rates.size());
  return s;
}

std::vector<UnitPhases> occupation_decomposition(
    const std::vector<ProfileEvent>& events) {
  auto traces = collect_unit_traces(events);
  std::vector<UnitPhases> out;
  for (const auto& [uid, t] : traces) {
    if (!t.assign_us || !t.release_us || !t.exec_start_us || !t.exec_stop_us)
      continue;
    auto exec_entry = ts_of_state(t, UnitState::A_EXECUTING);
    if (!exec_entry) continue;
    UnitPhases p;
    p.uid = uid;
    p.cores = t.cores;
    auto sched_entry = ts_of_state(t, UnitState::A_SCHEDULING);
    p.scheduling_us = sched_entry ? *t.assign_us - *sched_entry : 0;
    p.pickup_us = *exec_entry - *t.assign_us;
    p.spawn_us = *t.exec_start_us - *exec_entry;
    p.runtime_us = *t.exec_stop_us - *t.exec_start_us;
    p.unschedule_us = *t.release_us - *t.exec_stop_us;
    p.occupation_us = *t.release_us - *t.assign_us;
    out.push_back(std::move(p));
  }
  return out;
}

int64_t busy_core_integral_us(const std::vector<ProfileEvent>& events) {
  std::map<int64_t, int64_t> deltas;
  for (const auto& e : events) {
    if (e.label != "assign" && e.label != "release") continue;
    int cores = e.detail.empty() ? 1 : std::max(1, std::atoi(e.detail.c_str()));
    deltas[e.ts_mono_us] += (e.label == "assign") ? cores : -cores;
  }
  int64_t integral = 0;
  int64_t level = 0;
  std::optional<int64_t> prev;
  for (const auto& [t, d] : deltas) {
    if (prev) integral += level * (t - *prev);
    level += d;
    prev = t;
  }
  return integral;
}

int64_t occupation_sum_us(const std::vector<ProfileEvent>& events) {
  auto traces = collect_unit_traces(events);
  int64_t sum = 0;
  for (const auto& [uid, t] : traces) {
    if (!t.assign_us || !t.release_us) continue;
    sum += static_cast<int64_t>(t.cores) * (*t.release_us - *t.assign_us);
  }
  return sum;
}

double series_max(const std::vector<SeriesPoint>& series) {
  double m = 0;
  for (const auto& p : series) m = std::max(m, p.value);
  return m;
}

int count_peak_plateaus(const std::vector<SeriesPoint>& series,
                        int64_t min_width_us) {
  if (series.empty()) return 0;
  const double peak = series_max(series);
  int plateaus = 0;
  std::optional<int64_t> run_start;
  for (size_t i = 0; i < series.size(); ++i) {
    bool at_peak = series[i].value == peak;
    if (at_peak && !run_start) run_start = series[i].t_us;
    if (!at_peak && run_start) {
      if (series[i].t_us - *run_start >= min_width_us) ++plateaus;
      run_start.reset();
    }
  }
  // A run still open at the end of the series has zero remaining width.
  return plateaus;
}

int count_zero_troughs(const std::vector<SeriesPoint>& series) {
  int troughs = 0;
  bool seen_activity = false;
  std::optional<size_t> zero_start;
  for (size_t i = 0; i < series.size(); ++i) {
    if (series[i].value > 0) {
      if (zero_start && seen_activity &&
          series[i].t_us > series[*zero_start].t_us)
        ++troughs;
      zero_start.reset();
      seen_activity = true;
    } else if (!zero_start) {
      zero_start = i;
    }
  }
  return troughs;
}

}  // namespace pilotrt
