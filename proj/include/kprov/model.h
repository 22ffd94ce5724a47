#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kprov/filter.h"
#include "kprov/resources.h"

namespace kprov {

/// Simulation time, integer seconds.
using SimTime = int64_t;
using JobId = int64_t;

/// Label carried by every pod the provisioner creates; snapshots select on it.
inline constexpr const char* kOwnerLabel = "kprov.io/owner=htcondor-provisioner";

enum class JobState { kIdle, kRunning, kCompleted, kRemoved };

const char* ToString(JobState state);
JobState ParseJobState(const std::string& text);

struct JobAd {
  JobId job_id = 0;
  JobState state = JobState::kIdle;
  ResourceVector request;
  Attributes attributes;
  // Machine-side constraint evaluated against slot attributes.
  FilterExpr requirements;
  SimTime submit_time = 0;
  // Service demand. No checkpointing, so this is also what remains after a
  // restart.
  SimTime duration = 0;
  int64_t restart_count = 0;

  bool operator==(const JobAd&) const = default;
};

/// Node label constraint. A plain rule needs labels[key] in values; a negated
/// rule needs the key absent or its value outside values.
struct AffinityRule {
  std::string key;
  std::vector<std::string> values;
  bool negated = false;

  bool operator==(const AffinityRule&) const = default;
};

bool AffinitySatisfied(const AffinityRule& rule, const Attributes& labels);
bool AffinitySatisfied(const std::vector<AffinityRule>& rules, const Attributes& labels);

/// Orchestrator-side pod template. Provisioner pods carry owner_label ==
/// kOwnerLabel; pods from other tenants leave it empty.
struct PodSpec {
  std::string pod_name;
  GroupKey group;
  ResourceVector request;
  int64_t priority = 0;
  std::vector<std::string> tolerations;
  std::vector<AffinityRule> affinity;
  std::vector<std::pair<std::string, std::string>> env;
  std::vector<std::string> secret_refs;
  std::string image;
  FilterExpr start_filter;
  Attributes advertised_attributes;
  std::string owner_label;

  bool operator==(const PodSpec&) const = default;
  bool owned() const { return owner_label == kOwnerLabel; }
};

enum class PodPhase { kPending, kRunning, kSucceeded, kFailed };

const char* ToString(PodPhase phase);
PodPhase ParsePodPhase(const std::string& text);
inline bool IsTerminal(PodPhase phase) {
  return phase == PodPhase::kSucceeded || phase == PodPhase::kFailed;
}

struct PodState {
  PodSpec spec;
  PodPhase phase = PodPhase::kPending;
  std::optional<std::string> bound_node;
  SimTime created_time = 0;
  SimTime scheduled_time = 0;
  SimTime terminated_time = 0;
  std::optional<JobId> current_job;
  SimTime last_claim_end = 0;

  bool operator==(const PodState&) const = default;
};

struct NodeShape {
  std::string name;
  ResourceVector capacity;
  Attributes labels;
  std::vector<std::string> taints;
  SimTime boot_delay = 0;

  bool operator==(const NodeShape&) const = default;
};

struct Node {
  std::string node_id;
  std::string shape;
  ResourceVector capacity;
  Attributes labels;
  std::vector<std::string> taints;
  SimTime created_time = 0;
  SimTime ready_time = 0;
  bool spot = false;

  bool ready(SimTime now) const { return now >= ready_time; }
};

/// Every taint key must appear among the tolerations.
bool ToleratesAll(const std::vector<std::string>& tolerations,
                  const std::vector<std::string>& taints);

}  // namespace kprov
