#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

namespace aim {

// What the metric timers need to know about one vehicle after a step.
struct VehicleObservation {
  bool leader_in_zone = false;  // front of an incoming lane, inside the approach zone
  bool granted = false;         // holds (or is part of) an intersection grant
  double speed = 0.0;
  std::int64_t granted_at = -1;  // step of the most recent grant, kept after the crossing
};

// Crossing Waiting Time and Traffic Waiting Time accumulators.
//
// Timestamps: the observation taken after the motion of step `c` describes
// time c + 1, which is also the time of the decision made in step c + 1.
// A lane leader seen after step c and granted in step c + 1 therefore has a
// CWT of zero.
//
//   CWT  opens when a vehicle is an ungranted lane leader in the approach zone
//        and closes at its grant. One event per intersection entry.
//   TWT  opens when a queued vehicle (not the lane leader, not granted) drops
//        below the wait-speed threshold. Creeping forward in the queue stays
//        in the episode; it closes once the vehicle is back at free speed,
//        becomes the lane leader, or is granted as part of a platoon.
class RunMetrics {
public:
  explicit RunMetrics(std::size_t vehicle_count = 0)
      : cwt_open_since_(vehicle_count, -1), twt_open_steps_(vehicle_count, 0) {}

  void on_step(std::span<const VehicleObservation> obs, std::int64_t clock, double wait_speed_threshold,
               double free_speed = std::numeric_limits<double>::infinity()) {
    if (obs.size() != cwt_open_since_.size()) {
      cwt_open_since_.assign(obs.size(), -1);
      twt_open_steps_.assign(obs.size(), 0);
    }
    for (std::size_t i = 0; i < obs.size(); ++i) {
      const auto& o = obs[i];
      auto& since = cwt_open_since_[i];
      auto& queued = twt_open_steps_[i];

      // A grant may be issued and the crossing finished within one step, so
      // the timer closes on the grant step rather than on the granted flag.
      if (since >= 0 && o.granted_at >= since) {
        cwt_events_.push_back(static_cast<double>(o.granted_at - since));
        since = -1;
      }
      if (!o.granted && o.leader_in_zone && since < 0) since = clock + 1;

      const bool in_line = !o.granted && !o.leader_in_zone;
      const bool queued_now =
          in_line && (o.speed < wait_speed_threshold || (queued > 0 && o.speed < free_speed));
      if (queued_now) {
        ++queued;
      } else if (queued > 0) {
        twt_episodes_.push_back(static_cast<double>(queued));
        queued = 0;
      }
    }
  }

  const std::vector<double>& cwt_events() const { return cwt_events_; }
  const std::vector<double>& twt_episodes() const { return twt_episodes_; }

  // Open timers, for the disjointness check.
  bool cwt_open(std::size_t vehicle) const { return cwt_open_since_.at(vehicle) >= 0; }
  bool twt_open(std::size_t vehicle) const { return twt_open_steps_.at(vehicle) > 0; }

  // Direct event injection, used by replay and synthetic tests.
  void record_cwt(double seconds) { cwt_events_.push_back(seconds); }
  void record_twt(double seconds) { twt_episodes_.push_back(seconds); }

  friend bool operator==(const RunMetrics&, const RunMetrics&) = default;

private:
  std::vector<std::int64_t> cwt_open_since_;
  std::vector<std::int64_t> twt_open_steps_;
  std::vector<double> cwt_events_;
  std::vector<double> twt_episodes_;
};

struct SampleStats {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation, n - 1 denominator
  std::size_t n = 0;
};

inline SampleStats sample_stats(std::span<const double> xs) {
  SampleStats s;
  s.n = xs.size();
  if (xs.empty()) return s;
  s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  if (xs.size() >= 2) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

struct RunSummary {
  double cwt_mean = 0.0;
  double twt_mean = 0.0;
  std::size_t cwt_events = 0;
  std::size_t twt_episodes = 0;
  double cwt_event_sd = 0.0;
  double twt_episode_sd = 0.0;

  double total() const { return cwt_mean + twt_mean; }
};

// Means over recorded events; timers still open at the end are dropped.
inline RunSummary run_summary(const RunMetrics& m) {
  const auto c = sample_stats(m.cwt_events());
  const auto t = sample_stats(m.twt_episodes());
  return {c.mean, t.mean, c.n, t.n, c.sd, t.sd};
}

struct BatchStats {
  SampleStats cwt;
  SampleStats twt;
  // Fewer than two runs: sd is reported as 0 and this flag is set.
  bool sd_undefined = false;

  double total_mean() const { return cwt.mean + twt.mean; }
};

inline BatchStats batch_stats(std::span<const RunSummary> runs) {
  std::vector<double> c, t;
  c.reserve(runs.size());
  t.reserve(runs.size());
  for (const auto& r : runs) {
    c.push_back(r.cwt_mean);
    t.push_back(r.twt_mean);
  }
  return {sample_stats(c), sample_stats(t), runs.size() < 2};
}

}  // namespace aim
