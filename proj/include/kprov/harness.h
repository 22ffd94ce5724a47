#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kprov/json_io.h"
#include "kprov/scenario.h"

namespace kprov {

struct EventRecord {
  SimTime time = 0;
  int64_t seq = 0;
  std::string kind;
  std::string subject;
  Json detail = Json::object();
};

struct MetricsSample {
  SimTime time = 0;
  int64_t idle_jobs = 0;
  int64_t running_jobs = 0;
  int64_t completed_jobs = 0;
  // Provisioner-owned execute pods only.
  int64_t pending_pods = 0;
  int64_t running_pods = 0;
  int64_t nodes_total = 0;
  // Over every running pod and every node, booting nodes included.
  int64_t gpus_allocated = 0;
  int64_t gpus_capacity = 0;
  // Pods evicted by priority preemption or node loss.
  int64_t cum_preemptions = 0;
  int64_t cum_pods_submitted = 0;

  bool operator==(const MetricsSample&) const = default;
};

enum class FaultInjection {
  kNone,
  // Binds a pod as large as a whole node onto an occupied node.
  kOvercommit,
};

struct RunOptions {
  std::optional<uint64_t> seed_override;
  FaultInjection fault = FaultInjection::kNone;
};

struct RunResult {
  std::vector<EventRecord> events;
  std::vector<MetricsSample> metrics;
  int64_t jobs_submitted = 0;
  int64_t jobs_completed = 0;
  int64_t jobs_removed = 0;
};

/// Runs the scenario to its horizon.
///
/// Every visited timestamp executes its phases in a fixed order: workload
/// arrivals, node readiness, scheduling (with preemption), negotiation, job
/// completions, startd self-termination, provisioner cycle, autoscaler, spot
/// kills, invariant checks, metrics. Periodic phases fire when the time is a
/// multiple of their interval. The same scenario and seed always produce the
/// same events and metrics.
///
/// Throws InvariantViolation as soon as a cross-module invariant breaks.
RunResult Run(const Scenario& scenario, const RunOptions& options = {});

inline constexpr const char* kMetricsHeader =
    "time,idle_jobs,running_jobs,completed_jobs,pending_pods,running_pods,nodes_total,"
    "gpus_allocated,gpus_capacity,cum_preemptions,cum_pods_submitted";

/// CSV with kMetricsHeader as the first row, one row per sample.
std::string EmitMetrics(const std::vector<MetricsSample>& samples);
/// One JSON object per line: {"time","seq","kind","subject","detail"}.
std::string EmitEvents(const std::vector<EventRecord>& events);
std::string EventToJsonLine(const EventRecord& event);

}  // namespace kprov
