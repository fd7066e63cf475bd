#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pilotrt/profile.hpp"

namespace pilotrt {

// The analyzer works on profile event lists (see profile.hpp for the file
// format). It keys on the following labels:
//   state names          emitted by advance(), label == name of the state
//   "ingress"            agent pulled the unit from the workload channel
//   "assign"/"release"   scheduler marked cores BUSY/FREE, detail = cores
//   "exec_start"         process exists (spawn call returned)
//   "exec_stop"          process reaped, detail = exit code
//   "put"/"drop"/"final" unit left a component (forwarded / micro-benchmark
//                        drop / reached a final state)
// Agent-side events are those whose component id starts with "agent".

// One step of a piecewise-constant series: value holds from t_us until the
// next point's t_us.
struct SeriesPoint {
  int64_t t_us = 0;
  double value = 0.0;
};

// Phase durations for one executed unit, all in microseconds.
// pickup + spawn + runtime + unschedule == occupation, exactly: the phases
// tile the BUSY interval [assign, release]. scheduling covers A_SCHEDULING
// entry to assignment (including any wait-list residency) and lies outside
// the BUSY interval.
struct UnitPhases {
  std::string uid;
  int cores = 1;
  int64_t scheduling_us = 0;
  int64_t pickup_us = 0;
  int64_t spawn_us = 0;
  int64_t runtime_us = 0;
  int64_t unschedule_us = 0;
  int64_t occupation_us = 0;
};

struct RateSummary {
  double mean_per_s = 0.0;
  double stdev_per_s = 0.0;
  double cv = 0.0;  // stdev / mean over post-warm-up windows
  int windows = 0;
  int64_t span_us = 0;
  size_t count = 0;
};

struct MetricsReport {
  double ttc_a_s = 0.0;
  double ttc_s = 0.0;
  double utilization = 0.0;
  std::vector<SeriesPoint> concurrency;
  std::vector<SeriesPoint> throughput;
  std::vector<UnitPhases> decomposition;
};

// Agent-side span: from the first unit entering A_STAGING_IN (or, when
// staging is skipped, its first agent-side event) to the last unit leaving
// A_STAGING_OUT (or its final agent-side transition). Throws EmptyLog.
int64_t compute_ttc_a_us(const std::vector<ProfileEvent>& events);
double compute_ttc_a_s(const std::vector<ProfileEvent>& events);

// Time-integrated fraction of pilot cores occupied by units in A_EXECUTING
// during ttc_a. Throws EmptyLog.
double compute_utilization(const std::vector<ProfileEvent>& events,
                           int pilot_cores);

// Step series of the number of units in A_EXECUTING over time.
std::vector<SeriesPoint> concurrency_series(
    const std::vector<ProfileEvent>& events);

// Units leaving `component` per second, in fixed windows (default 1 s).
std::vector<SeriesPoint> throughput_series(
    const std::vector<ProfileEvent>& events, std::string_view component,
    int64_t window_us = 1000000);

// mean +- stdev of the completion rate of `component`, windows adapted to
// the span, first (warm-up) and trailing partial window dropped.
RateSummary summarize_component_rate(const std::vector<ProfileEvent>& events,
                                     std::string_view component);

// Per-unit phase decomposition; covers units with a complete
// assign/exec_start/exec_stop/release record.
std::vector<UnitPhases> occupation_decomposition(
    const std::vector<ProfileEvent>& events);

// Integral of BUSY cores over time, from the assign/release event sweep.
int64_t busy_core_integral_us(const std::vector<ProfileEvent>& events);

// Sum over units of cores x (release - assign); equals the sweep integral
// when every assignment has a matching release.
int64_t occupation_sum_us(const std::vector<ProfileEvent>& events);

// Number of maximal intervals where the series sits at its peak value for
// at least min_width_us. For an n-generation workload of equal-duration
// units this counts the generations.
int count_peak_plateaus(const std::vector<SeriesPoint>& series,
                        int64_t min_width_us);

// Interior zero intervals: value == 0 for a nonzero width, with activity
// both before and after.
int count_zero_troughs(const std::vector<SeriesPoint>& series);

double series_max(const std::vector<SeriesPoint>& series);

}  // namespace pilotrt
