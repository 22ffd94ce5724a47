#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "kprov/config.h"
#include "kprov/k8s_sim.h"
#include "kprov/model.h"

namespace kprov {

/// Fixed when min == max, otherwise drawn uniformly from [min, max] with the
/// scenario seed at submission time.
struct DurationSpec {
  SimTime min = 0;
  SimTime max = 0;

  bool operator==(const DurationSpec&) const = default;
};

struct WorkloadEntry {
  SimTime time = 0;
  int64_t count = 0;
  ResourceVector request;
  Attributes attributes;
  FilterExpr requirements;
  DurationSpec duration;

  bool operator==(const WorkloadEntry&) const = default;
};

/// Pods of other cluster tenants, e.g. latency-sensitive services that
/// preempt opportunistic execute pods.
struct ServicePodEntry {
  SimTime time = 0;
  int64_t count = 0;
  ResourceVector request;
  int64_t priority = 0;
  SimTime duration_s = 0;
  std::vector<std::string> tolerations;

  bool operator==(const ServicePodEntry&) const = default;
};

struct InitialNodes {
  std::string shape;
  int64_t count = 0;
  bool spot = false;

  bool operator==(const InitialNodes&) const = default;
};

inline constexpr const char* kRandomNode = "random";

struct SpotKill {
  SimTime time = 0;
  // Node id, or kRandomNode for a seeded pick among spot nodes (any node if
  // there are none).
  std::string node = kRandomNode;

  bool operator==(const SpotKill&) const = default;
};

/// `count` kills of random nodes at seeded times within [start, end].
struct RandomSpotKills {
  int64_t count = 0;
  SimTime start = 0;
  SimTime end = 0;

  bool operator==(const RandomSpotKills&) const = default;
};

struct Scenario {
  std::string name;
  uint64_t seed = 0;
  SimTime horizon_s = 0;
  SimTime metrics_interval_s = 60;
  SimTime negotiator_interval_s = 10;
  SimTime scheduler_interval_s = 10;
  // 0 keeps unschedulable pods Pending forever.
  SimTime unschedulable_timeout_s = 0;
  std::vector<NodeShape> shapes;
  std::vector<InitialNodes> initial_nodes;
  std::vector<WorkloadEntry> workload;
  std::vector<ServicePodEntry> service_pods;
  std::vector<SpotKill> spot_kills;
  RandomSpotKills random_spot_kills;
  AutoscalerParams autoscaler;
  ProvisionerConfig config;

  bool operator==(const Scenario&) const = default;
};

/// Parses and validates a scenario document. `config_path` entries resolve
/// against `base_dir`. Throws SchemaError naming the offending field.
Scenario LoadScenario(std::string_view text, const std::filesystem::path& base_dir = {});
Scenario LoadScenarioFile(const std::filesystem::path& path);

std::string ReadFile(const std::filesystem::path& path);

}  // namespace kprov
