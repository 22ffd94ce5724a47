#include "kprov/k8s_sim.h"

#include <algorithm>
#include <cstdio>
#include <functional>
#include <stdexcept>
#include <tuple>

#include "kprov/errors.h"

namespace kprov {

namespace {

// Expansion budget for the exhaustive fallback in Schedule.
constexpr int64_t kSearchBudget = 200000;

auto SizeKey(const ResourceVector& r) {
  return std::make_tuple(r.gpus, r.cpus_milli, r.memory_mib, r.disk_mib);
}

}  // namespace

bool PlacementAllowed(const PodSpec& pod, const Attributes& labels,
                      const std::vector<std::string>& taints) {
  return ToleratesAll(pod.tolerations, taints) && AffinitySatisfied(pod.affinity, labels);
}

bool Feasible(const PodSpec& pod, const Node& node, const ResourceVector& free) {
  return PlacementAllowed(pod, node.labels, node.taints) && Fits(pod.request, free);
}

bool TighterFit(const ResourceVector& a, const ResourceVector& b) {
  return SizeKey(a) < SizeKey(b);
}

ClusterState::ClusterState(std::vector<NodeShape> shapes, AutoscalerParams params)
    : shapes_(std::move(shapes)), params_(params) {}

const Node& ClusterState::AddNode(const std::string& shape_name, SimTime now, bool spot,
                                  std::optional<SimTime> ready_at) {
  auto shape = std::find_if(shapes_.begin(), shapes_.end(),
                            [&](const NodeShape& s) { return s.name == shape_name; });
  if (shape == shapes_.end()) throw std::out_of_range("unknown node shape '" + shape_name + "'");
  char id[24];
  std::snprintf(id, sizeof id, "%04lld", static_cast<long long>(++node_seq_));
  Node node;
  node.node_id = shape->name + "-" + id;
  node.shape = shape->name;
  node.capacity = shape->capacity;
  node.labels = shape->labels;
  node.taints = shape->taints;
  node.created_time = now;
  node.ready_time = ready_at.value_or(now + shape->boot_delay);
  node.spot = spot;
  return AddNode(std::move(node));
}

const Node& ClusterState::AddNode(Node node) {
  std::string id = node.node_id;
  empty_since_[id] = node.ready_time;
  auto [it, inserted] = nodes_.emplace(id, std::move(node));
  if (!inserted) throw std::invalid_argument("duplicate node id '" + id + "'");
  return it->second;
}

void ClusterState::SubmitPod(PodSpec spec, SimTime now) {
  std::string name = spec.pod_name;
  PodState pod;
  pod.spec = std::move(spec);
  pod.phase = PodPhase::kPending;
  pod.created_time = now;
  if (!pods_.emplace(name, std::move(pod)).second) {
    throw IllegalTransition("duplicate pod name '" + name + "'");
  }
}

void ClusterState::Bind(PodState& pod, const std::string& node_id, SimTime now) {
  pod.phase = PodPhase::kRunning;
  pod.bound_node = node_id;
  pod.scheduled_time = now;
  allocated_[node_id] += pod.spec.request;
  ++running_count_[node_id];
  empty_since_.erase(node_id);
  pending_since_.erase(pod.spec.pod_name);
}

void ClusterState::Unbind(PodState& pod, SimTime now) {
  const std::string& node_id = *pod.bound_node;
  allocated_[node_id] -= pod.spec.request;
  if (--running_count_[node_id] == 0) {
    running_count_.erase(node_id);
    allocated_.erase(node_id);
    if (nodes_.contains(node_id)) empty_since_[node_id] = now;
  }
}

ResourceVector ClusterState::Allocated(const std::string& node_id) const {
  auto it = allocated_.find(node_id);
  return it == allocated_.end() ? ResourceVector{} : it->second;
}

ResourceVector ClusterState::FreeCapacity(const Node& node) const {
  return node.capacity - Allocated(node.node_id);
}

ScheduleResult ClusterState::Schedule(SimTime now) {
  std::vector<PodState*> pending;
  for (auto& [name, pod] : pods_) {
    if (pod.phase == PodPhase::kPending) pending.push_back(&pod);
  }
  std::sort(pending.begin(), pending.end(), [](const PodState* a, const PodState* b) {
    return std::make_tuple(-a->spec.priority, a->created_time, std::cref(a->spec.pod_name)) <
           std::make_tuple(-b->spec.priority, b->created_time, std::cref(b->spec.pod_name));
  });
  std::vector<const Node*> ready;
  for (const auto& [id, node] : nodes_) {
    if (node.ready(now)) ready.push_back(&node);
  }

  std::map<std::string, ResourceVector> free;
  for (const Node* node : ready) free[node->node_id] = FreeCapacity(*node);

  ScheduleResult result;
  for (PodState* pod : pending) {
    const Node* best = nullptr;
    ResourceVector best_after;
    for (const Node* node : ready) {
      const ResourceVector& f = free[node->node_id];
      if (!Feasible(pod->spec, *node, f)) continue;
      ResourceVector after = f - pod->spec.request;
      if (best == nullptr || TighterFit(after, best_after)) {
        best = node;
        best_after = after;
      }
    }
    if (best == nullptr) {
      result.unschedulable.push_back(pod->spec.pod_name);
      continue;
    }
    free[best->node_id] = best_after;
    result.bindings.push_back({pod->spec.pod_name, best->node_id});
  }

  if (!result.unschedulable.empty() && !ready.empty()) {
    if (auto full = SearchFullAssignment(pending, ready)) {
      result.bindings = std::move(*full);
      result.unschedulable.clear();
    }
  }
  for (const auto& b : result.bindings) Bind(pods_.at(b.pod_name), b.node_id, now);
  return result;
}

std::optional<std::vector<Binding>> ClusterState::SearchFullAssignment(
    const std::vector<PodState*>& pending, const std::vector<const Node*>& ready) const {
  // Cheap necessary conditions first.
  ResourceVector total_free;
  ResourceVector total_request;
  for (const Node* node : ready) total_free += FreeCapacity(*node);
  for (const PodState* pod : pending) {
    total_request += pod->spec.request;
    bool anywhere = std::any_of(ready.begin(), ready.end(), [&](const Node* node) {
      return Feasible(pod->spec, *node, FreeCapacity(*node));
    });
    if (!anywhere) return std::nullopt;
  }
  if (!Fits(total_request, total_free)) return std::nullopt;

  std::vector<ResourceVector> free;
  for (const Node* node : ready) free.push_back(FreeCapacity(*node));
  std::vector<size_t> choice(pending.size());
  int64_t budget = kSearchBudget;

  std::function<bool(size_t)> place = [&](size_t i) -> bool {
    if (i == pending.size()) return true;
    if (--budget < 0) return false;
    const PodSpec& spec = pending[i]->spec;
    std::vector<size_t> order;
    for (size_t n = 0; n < ready.size(); ++n) {
      if (Feasible(spec, *ready[n], free[n])) order.push_back(n);
    }
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
      return TighterFit(free[a] - spec.request, free[b] - spec.request);
    });
    for (size_t n : order) {
      free[n] -= spec.request;
      choice[i] = n;
      if (place(i + 1)) return true;
      free[n] += spec.request;
      if (budget < 0) return false;
    }
    return false;
  };
  if (!place(0)) return std::nullopt;

  std::vector<Binding> bindings;
  for (size_t i = 0; i < pending.size(); ++i) {
    bindings.push_back({pending[i]->spec.pod_name, ready[choice[i]]->node_id});
  }
  return bindings;
}

std::optional<EvictionPlan> ClusterState::TryPreempt(const PodSpec& pod, SimTime now) const {
  std::optional<EvictionPlan> best;
  for (const auto& [id, node] : nodes_) {
    if (!node.ready(now) || !PlacementAllowed(pod, node.labels, node.taints)) continue;
    if (!Fits(pod.request, node.capacity)) continue;
    std::vector<const PodState*> victims;
    for (const auto& [name, other] : pods_) {
      if (other.phase == PodPhase::kRunning && other.bound_node == id &&
          other.spec.priority < pod.priority) {
        victims.push_back(&other);
      }
    }
    std::sort(victims.begin(), victims.end(), [](const PodState* a, const PodState* b) {
      if (a->spec.priority != b->spec.priority) return a->spec.priority < b->spec.priority;
      if (a->created_time != b->created_time) return a->created_time > b->created_time;
      return a->spec.pod_name < b->spec.pod_name;
    });
    ResourceVector free = FreeCapacity(node);
    EvictionPlan plan{id, {}};
    for (const PodState* victim : victims) {
      if (Fits(pod.request, free)) break;
      free += victim->spec.request;
      plan.victims.push_back(victim->spec.pod_name);
    }
    if (!Fits(pod.request, free)) continue;
    if (!best || plan.victims.size() < best->victims.size()) best = std::move(plan);
  }
  return best;
}

std::vector<std::string> ClusterState::ApplyPreemption(const std::string& preemptor,
                                                       const EvictionPlan& plan, SimTime now) {
  for (const auto& victim : plan.victims) FinishPod(victim, PodPhase::kFailed, now);
  PodState& pod = pods_.at(preemptor);
  if (pod.phase != PodPhase::kPending) {
    throw IllegalTransition("preemptor '" + preemptor + "' is not pending");
  }
  Bind(pod, plan.node_id, now);
  return plan.victims;
}

void ClusterState::MarkUnschedulable(const std::string& pod_name, SimTime now) {
  pending_since_.try_emplace(pod_name, now);
}

std::vector<std::string> ClusterState::KillNode(const std::string& node_id, SimTime now) {
  if (!nodes_.contains(node_id)) throw UnknownNode("unknown node '" + node_id + "'");
  std::vector<std::string> evicted;
  for (auto& [name, pod] : pods_) {
    if (pod.phase == PodPhase::kRunning && pod.bound_node == node_id) evicted.push_back(name);
  }
  for (const auto& name : evicted) FinishPod(name, PodPhase::kFailed, now);
  nodes_.erase(node_id);
  empty_since_.erase(node_id);
  return evicted;
}

AutoscaleResult ClusterState::Autoscale(SimTime now) {
  AutoscaleResult result;
  if (!params_.enabled) return result;

  struct Bin {
    ResourceVector free;
    const Attributes* labels;
    const std::vector<std::string>* taints;
  };
  std::vector<Bin> bins;
  for (const auto& [id, node] : nodes_) {
    if (!node.ready(now)) bins.push_back({FreeCapacity(node), &node.labels, &node.taints});
  }

  std::vector<const PodState*> waiting;
  for (const auto& [name, since] : pending_since_) {
    const PodState& pod = pods_.at(name);
    if (pod.phase == PodPhase::kPending && now - since >= params_.provision_delay_s) {
      waiting.push_back(&pod);
    }
  }
  std::sort(waiting.begin(), waiting.end(), [](const PodState* a, const PodState* b) {
    auto ka = SizeKey(a->spec.request);
    auto kb = SizeKey(b->spec.request);
    if (ka != kb) return ka > kb;
    return a->spec.pod_name < b->spec.pod_name;
  });

  std::vector<const NodeShape*> by_size;
  for (const auto& shape : shapes_) by_size.push_back(&shape);
  std::sort(by_size.begin(), by_size.end(), [](const NodeShape* a, const NodeShape* b) {
    return std::make_tuple(SizeKey(a->capacity), std::cref(a->name)) <
           std::make_tuple(SizeKey(b->capacity), std::cref(b->name));
  });

  std::vector<const NodeShape*> to_create;
  for (const PodState* pod : waiting) {
    bool placed = false;
    for (auto& bin : bins) {
      if (PlacementAllowed(pod->spec, *bin.labels, *bin.taints) &&
          Fits(pod->spec.request, bin.free)) {
        bin.free -= pod->spec.request;
        placed = true;
        break;
      }
    }
    if (placed) continue;
    auto shape = std::find_if(by_size.begin(), by_size.end(), [&](const NodeShape* s) {
      return Fits(pod->spec.request, s->capacity) &&
             PlacementAllowed(pod->spec, s->labels, s->taints);
    });
    if (shape == by_size.end()) {
      if (flagged_unsatisfiable_.insert(pod->spec.pod_name).second) {
        result.unsatisfiable.push_back(pod->spec.pod_name);
      }
      continue;
    }
    if (static_cast<int64_t>(nodes_.size() + to_create.size()) >= params_.max_nodes) continue;
    to_create.push_back(*shape);
    bins.push_back({(*shape)->capacity - pod->spec.request, &(*shape)->labels, &(*shape)->taints});
  }
  for (const NodeShape* shape : to_create) {
    result.added.push_back(AddNode(shape->name, now, params_.spot).node_id);
  }

  for (const auto& [id, since] : empty_since_) {
    const Node& node = nodes_.at(id);
    if (node.ready(now) && now - since >= params_.scale_down_idle_s) result.removed.push_back(id);
  }
  for (const auto& id : result.removed) {
    nodes_.erase(id);
    empty_since_.erase(id);
  }
  return result;
}

void ClusterState::FinishPod(const std::string& pod_name, PodPhase phase, SimTime now) {
  if (!IsTerminal(phase)) throw IllegalTransition("FinishPod needs a terminal phase");
  PodState& pod = pods_.at(pod_name);
  if (pod.phase == PodPhase::kRunning) {
    Unbind(pod, now);
  } else if (pod.phase != PodPhase::kPending || phase != PodPhase::kFailed) {
    throw IllegalTransition("pod '" + pod_name + "' cannot go from " + ToString(pod.phase) +
                            " to " + ToString(phase));
  }
  pod.phase = phase;
  pod.terminated_time = now;
  pod.current_job.reset();
  pending_since_.erase(pod_name);
}

void ClusterState::DeletePod(const std::string& pod_name) {
  auto it = pods_.find(pod_name);
  if (it == pods_.end()) return;
  if (!IsTerminal(it->second.phase)) {
    throw IllegalTransition("pod '" + pod_name + "' is not terminal");
  }
  flagged_unsatisfiable_.erase(pod_name);
  pods_.erase(it);
}

std::vector<std::string> ClusterState::ExpireUnschedulable(SimTime timeout_s, SimTime now) {
  std::vector<std::string> expired;
  for (const auto& [name, since] : pending_since_) {
    if (now - since > timeout_s) expired.push_back(name);
  }
  for (const auto& name : expired) FinishPod(name, PodPhase::kFailed, now);
  return expired;
}

void ClusterState::ForceBindForTesting(const std::string& pod_name, const std::string& node_id,
                                       SimTime now) {
  Bind(pods_.at(pod_name), node_id, now);
}

void ClusterState::SetCurrentJob(const std::string& pod_name, std::optional<JobId> job,
                                 SimTime now) {
  PodState& pod = pods_.at(pod_name);
  if (!job && pod.current_job) pod.last_claim_end = now;
  pod.current_job = job;
}

const Node* ClusterState::FindNode(const std::string& node_id) const {
  auto it = nodes_.find(node_id);
  return it == nodes_.end() ? nullptr : &it->second;
}

const PodState* ClusterState::FindPod(const std::string& pod_name) const {
  auto it = pods_.find(pod_name);
  return it == pods_.end() ? nullptr : &it->second;
}

std::vector<PodState> ClusterState::OwnedPods() const {
  std::vector<PodState> out;
  for (const auto& [name, pod] : pods_) {
    if (pod.spec.owned()) out.push_back(pod);
  }
  return out;
}

std::optional<SimTime> ClusterState::NextNodeReady(SimTime now) const {
  std::optional<SimTime> next;
  for (const auto& [id, node] : nodes_) {
    if (node.ready_time > now && (!next || node.ready_time < *next)) next = node.ready_time;
  }
  return next;
}

}  // namespace kprov
