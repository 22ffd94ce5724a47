#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "kprov/config.h"
#include "kprov/model.h"

namespace kprov {

using GroupCounts = std::map<GroupKey, int64_t>;

/// What the provisioner sees on one cycle. `pods` holds provisioner-owned
/// pods only.
struct PoolSnapshot {
  std::vector<JobAd> jobs;
  std::vector<PodState> pods;
  SimTime now = 0;
};

struct ReconcileActions {
  std::vector<PodSpec> submissions;
  // Terminal pods past completed_pod_ttl_s. Waiting and running pods are never
  // deleted; scale-down is the pods' own business.
  std::vector<std::string> deletions;

  bool operator==(const ReconcileActions&) const = default;
};

/// Idle jobs accepted by `filter`, ordered by (submit_time, job_id).
std::vector<JobAd> SelectCandidateJobs(const std::vector<JobAd>& jobs, const FilterExpr& filter);

GroupCounts DemandByGroup(const std::vector<JobAd>& candidates, const ProvisionerConfig& config);

/// Pods in phase Pending, per group. Running pods are not counted.
GroupCounts PendingByGroup(const std::vector<PodState>& pods);

GroupCounts RunningByGroup(const std::vector<PodState>& pods);

/// Per-group submission counts.
///
/// The raw deficit max(0, demand - pending) is first clamped by the per-group
/// cap (pending + running + submit <= max_pods_per_group). The remaining
/// budget, min(max_submit_per_cycle, max_total_pods - existing pods), is then
/// water-filled one pod at a time over groups ordered by descending raw
/// deficit with GroupKey order breaking ties, so a small group is never
/// starved by a large one. Groups with nothing to submit are absent.
GroupCounts PlanSubmissions(const GroupCounts& demand, const GroupCounts& pending,
                            const GroupCounts& running, const ProvisionerConfig& config);

/// Deterministic pod name built from namespace, group and sequence number.
std::string PodName(const ProvisionerConfig& config, const GroupKey& group, int64_t seq);

/// Renders an execute pod for `group`. Throws UnknownPriorityClass.
PodSpec RenderPod(const GroupKey& group, const ProvisionerConfig& config, int64_t seq,
                  SimTime now);

/// One provisioner cycle. Pure: the same snapshot, config and `first_seq`
/// always produce the same actions. Submissions use sequence numbers
/// first_seq, first_seq + 1, ... in GroupKey order.
ReconcileActions Reconcile(const PoolSnapshot& snapshot, const ProvisionerConfig& config,
                           int64_t first_seq);

}  // namespace kprov
