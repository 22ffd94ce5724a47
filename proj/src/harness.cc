#include "kprov/harness.h"

#include <algorithm>
#include <cstdio>
#include <random>

#include "kprov/condor_sim.h"
#include "kprov/config.h"
#include "kprov/errors.h"
#include "kprov/k8s_sim.h"
#include "kprov/provisioner.h"

namespace kprov {

namespace {

constexpr uint64_t kKillStreamSalt = 0x9E3779B97F4A7C15ULL;

Json StringsJson(const std::vector<std::string>& items) {
  Json out = Json::array();
  for (const auto& s : items) out.push_back(s);
  return out;
}

Json AffinityJson(const std::vector<AffinityRule>& rules) {
  Json out = Json::array();
  for (const auto& r : rules) out.push_back(FormatAffinityEntry(r));
  return out;
}

SimTime NextMultiple(SimTime t, SimTime interval) { return (t / interval + 1) * interval; }

class Simulation {
 public:
  Simulation(const Scenario& scenario, const RunOptions& options)
      : scenario_(scenario),
        config_(scenario.config),
        options_(options),
        seed_(options.seed_override.value_or(scenario.seed)),
        cluster_(scenario.shapes, scenario.autoscaler),
        duration_rng_(seed_),
        kill_rng_(seed_ ^ kKillStreamSalt) {
    kills_ = scenario.spot_kills;
    const RandomSpotKills& random = scenario.random_spot_kills;
    for (int64_t i = 0; i < random.count; ++i) {
      SimTime span = random.end - random.start + 1;
      kills_.push_back({random.start + static_cast<SimTime>(kill_rng_() % span), kRandomNode});
    }
    std::stable_sort(kills_.begin(), kills_.end(),
                     [](const SpotKill& a, const SpotKill& b) { return a.time < b.time; });
  }

  RunResult Execute() {
    Record(0, "run-start", scenario_.name,
           Json{{"seed", seed_},
                {"horizon_s", scenario_.horizon_s},
                {"filter", FormatFilter(config_.filter)},
                {"mem_quantum_mib", config_.mem_quantum_mib},
                {"disk_quantum_mib", config_.disk_quantum_mib},
                {"max_submit_per_cycle", config_.max_submit_per_cycle},
                {"max_pods_per_group", config_.max_pods_per_group},
                {"max_total_pods", config_.max_total_pods}});
    for (const auto& group : scenario_.initial_nodes) {
      for (int64_t i = 0; i < group.count; ++i) {
        const Node& node = cluster_.AddNode(group.shape, 0, group.spot, SimTime{0});
        RecordNodeAdd(0, node, "initial");
      }
    }

    SimTime t = 0;
    while (t <= scenario_.horizon_s) {
      Step(t);
      t = NextTime(t);
    }
    SimTime end = scenario_.horizon_s;
    result_.jobs_completed = pool_.CountJobs(JobState::kCompleted);
    result_.jobs_removed = pool_.CountJobs(JobState::kRemoved);
    Record(end, "run-end", scenario_.name,
           Json{{"jobs_submitted", result_.jobs_submitted},
                {"idle", pool_.CountJobs(JobState::kIdle)},
                {"running", pool_.CountJobs(JobState::kRunning)},
                {"completed", result_.jobs_completed},
                {"removed", result_.jobs_removed}});
    return std::move(result_);
  }

 private:
  void Step(SimTime t) {
    Arrivals(t);
    NodeReadiness(t);
    if (t % scenario_.scheduler_interval_s == 0) ScheduleCycle(t);
    if (t % scenario_.negotiator_interval_s == 0) Negotiate(t);
    Completions(t);
    if (t % scenario_.negotiator_interval_s == 0) SelfTerminate(t);
    if (t % config_.cycle_interval_s == 0) ProvisionerCycle(t);
    if (scenario_.autoscaler.enabled && t % scenario_.scheduler_interval_s == 0) Autoscale(t);
    SpotKills(t);
    CheckInvariants();
    if (t % scenario_.metrics_interval_s == 0) Sample(t);
  }

  SimTime NextTime(SimTime t) const {
    SimTime next = scenario_.horizon_s + 1;
    auto consider = [&](SimTime candidate) {
      if (candidate > t) next = std::min(next, candidate);
    };
    consider(NextMultiple(t, scenario_.scheduler_interval_s));
    consider(NextMultiple(t, scenario_.negotiator_interval_s));
    consider(NextMultiple(t, scenario_.metrics_interval_s));
    consider(NextMultiple(t, config_.cycle_interval_s));
    for (const auto& w : scenario_.workload) consider(w.time);
    for (const auto& p : scenario_.service_pods) consider(p.time);
    for (const auto& k : kills_) consider(k.time);
    if (auto ready = cluster_.NextNodeReady(t)) consider(*ready);
    if (auto done = pool_.NextCompletion()) consider(*done);
    for (const auto& [name, at] : service_end_) consider(at);
    return next;
  }

  // --- phases ---------------------------------------------------------------

  void Arrivals(SimTime t) {
    for (const auto& w : scenario_.workload) {
      if (w.time != t) continue;
      for (int64_t i = 0; i < w.count; ++i) {
        JobAd job;
        job.job_id = next_job_id_++;
        job.request = w.request;
        job.attributes = w.attributes;
        job.requirements = w.requirements;
        job.submit_time = t;
        job.duration = DrawDuration(w.duration);
        Record(t, "job-submit", std::to_string(job.job_id),
               Json{{"request", ToJson(job.request)},
                    {"attributes", ToJson(job.attributes)},
                    {"requirements", FormatFilter(job.requirements)},
                    {"duration", job.duration}});
        pool_.Submit(std::move(job));
        ++result_.jobs_submitted;
      }
    }
    for (const auto& p : scenario_.service_pods) {
      if (p.time != t) continue;
      for (int64_t i = 0; i < p.count; ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "svc-%06lld", static_cast<long long>(++service_seq_));
        PodSpec spec;
        spec.pod_name = name;
        spec.request = p.request;
        spec.priority = p.priority;
        spec.tolerations = p.tolerations;
        service_duration_[spec.pod_name] = p.duration_s;
        RecordPodSubmit(t, spec, std::nullopt);
        cluster_.SubmitPod(std::move(spec), t);
      }
    }
  }

  void NodeReadiness(SimTime t) {
    for (const auto& [id, node] : cluster_.nodes()) {
      if (node.ready_time == t) Record(t, "node-ready", id, Json::object());
    }
  }

  void ScheduleCycle(SimTime t) {
    ScheduleResult result = cluster_.Schedule(t);
    for (const auto& b : result.bindings) OnBound(t, b.pod_name, b.node_id);
    for (const auto& name : result.unschedulable) {
      const PodState* pod = cluster_.FindPod(name);
      if (pod == nullptr || pod->phase != PodPhase::kPending) continue;
      auto plan = cluster_.TryPreempt(pod->spec, t);
      if (!plan) {
        cluster_.MarkUnschedulable(name, t);
        continue;
      }
      int64_t preemptor_priority = pod->spec.priority;
      for (const auto& victim : plan->victims) {
        Record(t, "preempt", victim,
               Json{{"preemptor", name},
                    {"node", plan->node_id},
                    {"victim_priority", cluster_.FindPod(victim)->spec.priority},
                    {"preemptor_priority", preemptor_priority}});
      }
      cluster_.ApplyPreemption(name, *plan, t);
      for (const auto& victim : plan->victims) OnPodFailed(t, victim, "preempted");
      OnBound(t, name, plan->node_id);
    }
    if (scenario_.unschedulable_timeout_s > 0) {
      for (const auto& name : cluster_.ExpireUnschedulable(scenario_.unschedulable_timeout_s, t)) {
        Record(t, "pod-fail", name, Json{{"reason", "unschedulable-timeout"}});
      }
    }
    if (options_.fault == FaultInjection::kOvercommit && !fault_injected_) InjectOvercommit(t);
  }

  void Negotiate(SimTime t) {
    for (const auto& m : pool_.NegotiateCycle(t)) {
      cluster_.SetCurrentJob(m.pod_name, m.job_id, t);
      Record(t, "job-start", std::to_string(m.job_id), Json{{"pod", m.pod_name}});
    }
  }

  void Completions(SimTime t) {
    for (const auto& m : pool_.CompleteDue(t)) {
      cluster_.SetCurrentJob(m.pod_name, std::nullopt, t);
      Record(t, "job-complete", std::to_string(m.job_id), Json{{"pod", m.pod_name}});
    }
    std::vector<std::string> finished;
    for (const auto& [name, at] : service_end_) {
      if (at <= t) finished.push_back(name);
    }
    for (const auto& name : finished) {
      service_end_.erase(name);
      cluster_.FinishPod(name, PodPhase::kSucceeded, t);
      Record(t, "pod-terminate", name, Json{{"reason", "service-complete"}});
    }
  }

  void SelfTerminate(SimTime t) {
    for (const auto& name : pool_.SelfTerminationCandidates(config_.idle_timeout_s, t)) {
      pool_.RemoveSlot(name);
      cluster_.FinishPod(name, PodPhase::kSucceeded, t);
      Record(t, "pod-terminate", name, Json{{"reason", "self-terminate"}});
    }
  }

  void ProvisionerCycle(SimTime t) {
    PoolSnapshot snapshot{pool_.AllJobs(), cluster_.OwnedPods(), t};
    ReconcileActions actions = Reconcile(snapshot, config_, next_pod_seq_);
    int64_t cycle = ++cycle_count_;
    Record(t, "provisioner-cycle", std::to_string(cycle),
           Json{{"submissions", actions.submissions.size()},
                {"deletions", actions.deletions.size()}});
    for (auto& spec : actions.submissions) {
      ++next_pod_seq_;
      ++cum_pods_submitted_;
      RecordPodSubmit(t, spec, cycle);
      cluster_.SubmitPod(std::move(spec), t);
    }
    for (const auto& name : actions.deletions) {
      cluster_.DeletePod(name);
      Record(t, "pod-delete", name, Json::object());
    }
  }

  void Autoscale(SimTime t) {
    AutoscaleResult result = cluster_.Autoscale(t);
    for (const auto& id : result.added) RecordNodeAdd(t, *cluster_.FindNode(id), "scale-up");
    for (const auto& id : result.removed) {
      Record(t, "node-remove", id, Json{{"reason", "scale-down"}});
    }
    for (const auto& name : result.unsatisfiable) {
      Record(t, "shape-unsatisfiable", name, Json::object());
    }
  }

  void SpotKills(SimTime t) {
    for (const auto& kill : kills_) {
      if (kill.time != t) continue;
      std::string target = kill.node;
      if (target == kRandomNode) {
        std::vector<std::string> spot;
        std::vector<std::string> all;
        for (const auto& [id, node] : cluster_.nodes()) {
          all.push_back(id);
          if (node.spot) spot.push_back(id);
        }
        const auto& pick_from = spot.empty() ? all : spot;
        if (pick_from.empty()) {
          Record(t, "spot-kill-skipped", kill.node, Json{{"reason", "no nodes"}});
          continue;
        }
        target = pick_from[kill_rng_() % pick_from.size()];
      }
      if (cluster_.FindNode(target) == nullptr) {
        Record(t, "spot-kill-skipped", target, Json{{"reason", "unknown node"}});
        continue;
      }
      auto evicted = cluster_.KillNode(target, t);
      Record(t, "node-kill", target, Json{{"pods", StringsJson(evicted)}});
      for (const auto& name : evicted) OnPodFailed(t, name, "node-killed");
    }
  }

  // --- helpers --------------------------------------------------------------

  void OnBound(SimTime t, const std::string& pod_name, const std::string& node_id) {
    const PodState& pod = *cluster_.FindPod(pod_name);
    Record(t, "bind", pod_name, Json{{"node", node_id}});
    if (pod.spec.owned()) {
      Slot slot;
      slot.pod_name = pod_name;
      slot.capacity = pod.spec.request;
      slot.advertised_attributes = pod.spec.advertised_attributes;
      slot.start_filter = pod.spec.start_filter;
      slot.ready_time = t;
      pool_.AddSlot(std::move(slot));
    } else if (auto it = service_duration_.find(pod_name); it != service_duration_.end()) {
      service_end_[pod_name] = t + it->second;
      service_duration_.erase(it);
    }
  }

  // The pod is already Failed in the cluster; tell the pool.
  void OnPodFailed(SimTime t, const std::string& pod_name, const char* reason) {
    ++cum_preemptions_;
    Record(t, "pod-fail", pod_name, Json{{"reason", reason}});
    service_end_.erase(pod_name);
    if (auto job = pool_.PreemptSlot(pod_name, t)) {
      Record(t, "job-preempt", std::to_string(*job), Json{{"pod", pod_name}});
    }
  }

  void InjectOvercommit(SimTime t) {
    for (const auto& [id, node] : cluster_.nodes()) {
      if (cluster_.Allocated(id).IsZero()) continue;
      PodSpec spec;
      spec.pod_name = "fault-overcommit";
      spec.request = node.capacity;
      RecordPodSubmit(t, spec, std::nullopt);
      cluster_.SubmitPod(spec, t);
      cluster_.ForceBindForTesting(spec.pod_name, id, t);
      Record(t, "bind", spec.pod_name, Json{{"node", id}});
      fault_injected_ = true;
      return;
    }
  }

  int64_t DrawDuration(const DurationSpec& d) {
    if (d.max <= d.min) return d.min;
    return d.min + static_cast<SimTime>(duration_rng_() % static_cast<uint64_t>(d.max - d.min + 1));
  }

  void RecordNodeAdd(SimTime t, const Node& node, const char* reason) {
    Record(t, "node-add", node.node_id,
           Json{{"shape", node.shape},
                {"capacity", ToJson(node.capacity)},
                {"labels", ToJson(node.labels)},
                {"taints", StringsJson(node.taints)},
                {"spot", node.spot},
                {"ready_time", node.ready_time},
                {"reason", reason}});
  }

  void RecordPodSubmit(SimTime t, const PodSpec& spec, std::optional<int64_t> cycle) {
    Json detail{{"owned", spec.owned()},
                {"group", spec.group.ToString()},
                {"request", ToJson(spec.request)},
                {"priority", spec.priority},
                {"tolerations", StringsJson(spec.tolerations)},
                {"affinity", AffinityJson(spec.affinity)}};
    if (spec.owned()) {
      detail["start_filter"] = FormatFilter(spec.start_filter);
      detail["advertised"] = ToJson(spec.advertised_attributes);
    }
    if (cycle) detail["cycle"] = *cycle;
    Record(t, "pod-submit", spec.pod_name, std::move(detail));
  }

  void Record(SimTime t, std::string kind, std::string subject, Json detail) {
    result_.events.push_back(
        {t, static_cast<int64_t>(result_.events.size()), std::move(kind), std::move(subject),
         std::move(detail)});
  }

  [[noreturn]] void Violation(const std::string& message) const {
    std::string last = result_.events.empty() ? "" : EventToJsonLine(result_.events.back());
    throw InvariantViolation(message, last);
  }

  void CheckInvariants() const {
    std::map<std::string, ResourceVector> used;
    for (const auto& [name, pod] : cluster_.pods()) {
      if (pod.phase != PodPhase::kRunning) continue;
      const Node* node = pod.bound_node ? cluster_.FindNode(*pod.bound_node) : nullptr;
      if (node == nullptr) Violation("running pod " + name + " is bound to no existing node");
      if (!PlacementAllowed(pod.spec, node->labels, node->taints)) {
        Violation("pod " + name + " violates taints or affinity of " + node->node_id);
      }
      used[node->node_id] += pod.spec.request;
      if (pod.spec.owned() && !pool_.slots().contains(name)) {
        Violation("running pod " + name + " has no registered slot");
      }
    }
    for (const auto& [id, total] : used) {
      if (!Fits(total, cluster_.FindNode(id)->capacity)) {
        Violation("node " + id + " is overcommitted: " + total.ToString());
      }
    }
    for (const auto& [name, slot] : pool_.slots()) {
      const PodState* pod = cluster_.FindPod(name);
      if (pod == nullptr || pod->phase != PodPhase::kRunning) {
        Violation("slot " + name + " belongs to a pod that is not running");
      }
    }
    int64_t accounted = 0;
    for (JobState s : {JobState::kIdle, JobState::kRunning, JobState::kCompleted,
                       JobState::kRemoved}) {
      accounted += pool_.CountJobs(s);
    }
    if (accounted != result_.jobs_submitted) {
      Violation("job conservation broken: " + std::to_string(accounted) + " accounted of " +
                std::to_string(result_.jobs_submitted));
    }
  }

  void Sample(SimTime t) {
    MetricsSample s;
    s.time = t;
    s.idle_jobs = pool_.CountJobs(JobState::kIdle);
    s.running_jobs = pool_.CountJobs(JobState::kRunning);
    s.completed_jobs = pool_.CountJobs(JobState::kCompleted);
    for (const auto& [name, pod] : cluster_.pods()) {
      if (pod.phase == PodPhase::kRunning) s.gpus_allocated += pod.spec.request.gpus;
      if (!pod.spec.owned()) continue;
      if (pod.phase == PodPhase::kPending) ++s.pending_pods;
      if (pod.phase == PodPhase::kRunning) ++s.running_pods;
    }
    s.nodes_total = static_cast<int64_t>(cluster_.nodes().size());
    for (const auto& [id, node] : cluster_.nodes()) s.gpus_capacity += node.capacity.gpus;
    s.cum_preemptions = cum_preemptions_;
    s.cum_pods_submitted = cum_pods_submitted_;
    if (s.gpus_allocated > s.gpus_capacity) Violation("gpus_allocated exceeds gpus_capacity");
    result_.metrics.push_back(s);
  }

  const Scenario& scenario_;
  const ProvisionerConfig& config_;
  RunOptions options_;
  uint64_t seed_;
  ClusterState cluster_;
  CondorPool pool_;
  std::mt19937_64 duration_rng_;
  std::mt19937_64 kill_rng_;
  std::vector<SpotKill> kills_;
  std::map<std::string, SimTime> service_duration_;
  std::map<std::string, SimTime> service_end_;
  RunResult result_;
  JobId next_job_id_ = 1;
  int64_t next_pod_seq_ = 1;
  int64_t service_seq_ = 0;
  int64_t cycle_count_ = 0;
  int64_t cum_preemptions_ = 0;
  int64_t cum_pods_submitted_ = 0;
  bool fault_injected_ = false;
};

}  // namespace

RunResult Run(const Scenario& scenario, const RunOptions& options) {
  return Simulation(scenario, options).Execute();
}

std::string EventToJsonLine(const EventRecord& event) {
  Json line{{"time", event.time},
            {"seq", event.seq},
            {"kind", event.kind},
            {"subject", event.subject},
            {"detail", event.detail}};
  return line.dump();
}

std::string EmitEvents(const std::vector<EventRecord>& events) {
  std::string out;
  for (const auto& e : events) {
    out += EventToJsonLine(e);
    out += '\n';
  }
  return out;
}

std::string EmitMetrics(const std::vector<MetricsSample>& samples) {
  std::string out = kMetricsHeader;
  out += '\n';
  for (const auto& s : samples) {
    const char* sep = "";
    for (int64_t v : {s.time, s.idle_jobs, s.running_jobs, s.completed_jobs, s.pending_pods,
                      s.running_pods, s.nodes_total, s.gpus_allocated, s.gpus_capacity,
                      s.cum_preemptions, s.cum_pods_submitted}) {
      out += sep;
      out += std::to_string(v);
      sep = ",";
    }
    out += '\n';
  }
  return out;
}

}  // namespace kprov
