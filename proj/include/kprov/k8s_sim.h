#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "kprov/model.h"

namespace kprov {

struct AutoscalerParams {
  SimTime provision_delay_s = 0;
  SimTime scale_down_idle_s = 600;
  int64_t max_nodes = 100;
  bool enabled = false;
  // Whether nodes created by the autoscaler are spot instances.
  bool spot = false;

  bool operator==(const AutoscalerParams&) const = default;
};

struct Binding {
  std::string pod_name;
  std::string node_id;

  bool operator==(const Binding&) const = default;
};

struct ScheduleResult {
  std::vector<Binding> bindings;
  std::vector<std::string> unschedulable;
};

struct EvictionPlan {
  std::string node_id;
  std::vector<std::string> victims;

  bool operator==(const EvictionPlan&) const = default;
};

struct AutoscaleResult {
  std::vector<std::string> added;
  std::vector<std::string> removed;
  // Pods no catalog shape can host. Each pod is reported once.
  std::vector<std::string> unsatisfiable;
};

/// Taints tolerated and node affinity satisfied; ignores resources.
bool PlacementAllowed(const PodSpec& pod, const Attributes& labels,
                      const std::vector<std::string>& taints);

/// PlacementAllowed plus fits(request, free).
bool Feasible(const PodSpec& pod, const Node& node, const ResourceVector& free);

/// Orders candidate nodes for best-fit: less free capacity after placement
/// wins, compared lexicographically over (gpus, cpus, memory, disk).
bool TighterFit(const ResourceVector& free_after_a, const ResourceVector& free_after_b);

/// Simulated container cluster.
///
/// Only Running pods hold capacity. Terminal pods keep their bound_node for
/// the record until deleted.
class ClusterState {
 public:
  explicit ClusterState(std::vector<NodeShape> shapes = {}, AutoscalerParams params = {});

  /// Creates a node of a catalog shape that becomes ready after the shape's
  /// boot delay, or at `ready_at` when given. Throws std::out_of_range for an
  /// unknown shape.
  const Node& AddNode(const std::string& shape_name, SimTime now, bool spot,
                      std::optional<SimTime> ready_at = std::nullopt);
  /// Inserts a fully specified node.
  const Node& AddNode(Node node);

  /// Adds a Pending pod. Throws IllegalTransition on a duplicate name.
  void SubmitPod(PodSpec spec, SimTime now);

  /// Binds Pending pods in (priority desc, created_time asc, pod_name asc)
  /// order, each to the feasible ready node left with the least free
  /// capacity (ties by node_id). If that greedy pass strands pods, a bounded
  /// exhaustive search looks for an assignment that places every pending pod
  /// and uses it when one exists.
  ScheduleResult Schedule(SimTime now);

  /// Eviction plan that would make room for `pod` by evicting strictly lower
  /// priority pods, lowest priority first then newest first, on the node
  /// needing the fewest evictions (ties by node_id).
  std::optional<EvictionPlan> TryPreempt(const PodSpec& pod, SimTime now) const;

  /// Fails the plan's victims and binds `preemptor` to the plan's node.
  /// Returns the evicted pod names.
  std::vector<std::string> ApplyPreemption(const std::string& preemptor, const EvictionPlan& plan,
                                           SimTime now);

  /// Records the first time `pod_name` was found unschedulable.
  void MarkUnschedulable(const std::string& pod_name, SimTime now);

  /// Removes the node; every pod running there fails. Throws UnknownNode.
  std::vector<std::string> KillNode(const std::string& node_id, SimTime now);

  /// Node auto-provisioning. Adds nodes for pods unschedulable for at least
  /// provision_delay_s (first-fit decreasing into booting nodes, then into
  /// new nodes of the smallest fitting shape) and removes nodes that have
  /// been empty for scale_down_idle_s. Never moves pods.
  AutoscaleResult Autoscale(SimTime now);

  /// Running pod -> terminal phase, releasing its capacity. A Pending pod may
  /// also go straight to Failed.
  void FinishPod(const std::string& pod_name, PodPhase phase, SimTime now);
  /// Removes a terminal pod object.
  void DeletePod(const std::string& pod_name);
  /// Fails Pending pods unschedulable for longer than `timeout_s`.
  std::vector<std::string> ExpireUnschedulable(SimTime timeout_s, SimTime now);

  /// Binds without any feasibility check. Only for fault-injection runs that
  /// exercise the invariant checkers.
  void ForceBindForTesting(const std::string& pod_name, const std::string& node_id, SimTime now);

  void SetCurrentJob(const std::string& pod_name, std::optional<JobId> job, SimTime now);

  ResourceVector Allocated(const std::string& node_id) const;
  ResourceVector FreeCapacity(const Node& node) const;
  const Node* FindNode(const std::string& node_id) const;
  const PodState* FindPod(const std::string& pod_name) const;
  std::vector<PodState> OwnedPods() const;
  std::optional<SimTime> NextNodeReady(SimTime now) const;

  const std::map<std::string, Node>& nodes() const { return nodes_; }
  const std::map<std::string, PodState>& pods() const { return pods_; }
  const std::vector<NodeShape>& shapes() const { return shapes_; }
  const AutoscalerParams& autoscaler() const { return params_; }
  const std::map<std::string, SimTime>& pending_since() const { return pending_since_; }

 private:
  void Bind(PodState& pod, const std::string& node_id, SimTime now);
  void Unbind(PodState& pod, SimTime now);
  std::optional<std::vector<Binding>> SearchFullAssignment(
      const std::vector<PodState*>& pending, const std::vector<const Node*>& ready) const;

  std::vector<NodeShape> shapes_;
  AutoscalerParams params_;
  std::map<std::string, Node> nodes_;
  std::map<std::string, PodState> pods_;
  std::map<std::string, ResourceVector> allocated_;
  std::map<std::string, int64_t> running_count_;
  std::map<std::string, SimTime> empty_since_;
  std::map<std::string, SimTime> pending_since_;
  std::set<std::string> flagged_unsatisfiable_;
  int64_t node_seq_ = 0;
};

}  // namespace kprov
