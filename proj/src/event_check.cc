#include "kprov/event_check.h"

#include <map>
#include <optional>
#include <set>

#include "kprov/config.h"
#include "kprov/errors.h"
#include "kprov/json_io.h"
#include "kprov/provisioner.h"

namespace kprov {

namespace {

struct JobRecord {
  JobState state = JobState::kIdle;
  ResourceVector request;
  Attributes attributes;
  FilterExpr requirements;
  std::optional<std::string> pod;
};

struct PodRecord {
  PodPhase phase = PodPhase::kPending;
  bool owned = false;
  GroupKey group;
  ResourceVector request;
  int64_t priority = 0;
  std::vector<std::string> tolerations;
  std::vector<AffinityRule> affinity;
  FilterExpr start_filter;
  Attributes advertised;
  std::optional<std::string> node;
  std::optional<JobId> job;
};

struct NodeRecord {
  ResourceVector capacity;
  Attributes labels;
  std::vector<std::string> taints;
  SimTime ready_time = 0;
};

struct CycleSnapshot {
  GroupCounts deficit;
  GroupCounts existing;
  int64_t existing_total = 0;
  GroupCounts submitted;
  int64_t submitted_total = 0;
};

std::vector<std::string> Strings(const JsonReader& in) {
  in.ExpectArray();
  std::vector<std::string> out;
  for (size_t i = 0; i < in.Size(); ++i) out.push_back(in.Index(i).String());
  return out;
}

class Replayer {
 public:
  void Apply(const Json& line, int64_t line_no) {
    JsonReader event(line, "line " + std::to_string(line_no));
    event.ExpectObject({"time", "seq", "kind", "subject", "detail"});
    time_ = event.Field("time").NonNegativeInt();
    int64_t seq = event.Field("seq").Int();
    kind_ = event.Field("kind").String();
    subject_ = event.Field("subject").String();
    seq_ = seq;
    JsonReader detail = event.Field("detail");
    if (!detail.value().is_object()) detail.Fail("expected an object");

    if (last_seq_ && (time_ < last_time_ || seq <= *last_seq_)) {
      Report("event out of order after seq " + std::to_string(*last_seq_));
    }
    last_seq_ = seq;
    last_time_ = time_;

    std::optional<std::string> holding = std::move(unreleased_);
    unreleased_.reset();
    try {
      Dispatch(detail);
    } catch (const SchemaError&) {
      throw;
    } catch (const Error& e) {
      detail.Fail(e.what());
    }
    if (holding && !released_) Report("failed pod " + *holding + " still holds a job");
    released_ = false;
  }

  std::vector<std::string> TakeViolations() { return std::move(violations_); }

 private:
  void Dispatch(const JsonReader& d) {
    if (kind_ == "run-start") return RunStart(d);
    if (kind_ == "job-submit") return JobSubmit(d);
    if (kind_ == "pod-submit") return PodSubmit(d);
    if (kind_ == "bind") return Bind(d);
    if (kind_ == "preempt") return Preempt(d);
    if (kind_ == "pod-fail") return PodFail();
    if (kind_ == "job-preempt") return JobPreempt(d);
    if (kind_ == "job-start") return JobStart(d);
    if (kind_ == "job-complete") return JobComplete(d);
    if (kind_ == "pod-terminate") return PodTerminate();
    if (kind_ == "pod-delete") return PodDelete();
    if (kind_ == "node-add") return NodeAdd(d);
    if (kind_ == "node-ready") return NodeReady();
    if (kind_ == "node-remove") return NodeRemove();
    if (kind_ == "node-kill") return NodeKill(d);
    if (kind_ == "provisioner-cycle") return ProvisionerCycle();
    if (kind_ == "run-end") return RunEnd(d);
    if (kind_ == "spot-kill-skipped" || kind_ == "shape-unsatisfiable") return;
    throw SchemaError("kind", "unknown event kind '" + kind_ + "'");
  }

  void RunStart(const JsonReader& d) {
    config_.filter = ParseFilter(d.Field("filter").String());
    filter_text_ = FormatFilter(config_.filter);
    config_.mem_quantum_mib = d.Field("mem_quantum_mib").Int();
    config_.disk_quantum_mib = d.Field("disk_quantum_mib").Int();
    config_.max_submit_per_cycle = d.Field("max_submit_per_cycle").Int();
    config_.max_pods_per_group = d.Field("max_pods_per_group").Int();
    config_.max_total_pods = d.Field("max_total_pods").Int();
    started_ = true;
  }

  void JobSubmit(const JsonReader& d) {
    JobId id = SubjectId();
    if (jobs_.contains(id)) return Report("duplicate job");
    JobRecord job;
    job.request = ResourcesFromJson(d.Field("request"));
    job.attributes = AttributesFromJson(d.Field("attributes"));
    job.requirements = ParseFilter(d.Field("requirements").String());
    jobs_.emplace(id, std::move(job));
    ++submitted_;
  }

  void PodSubmit(const JsonReader& d) {
    if (pods_.contains(subject_)) return Report("duplicate pod");
    PodRecord pod;
    pod.owned = d.Field("owned").Bool();
    pod.group = GroupKey::Parse(d.Field("group").String());
    pod.request = ResourcesFromJson(d.Field("request"));
    pod.priority = d.Field("priority").Int();
    pod.tolerations = Strings(d.Field("tolerations"));
    JsonReader affinity = d.Field("affinity");
    for (const auto& entry : Strings(affinity)) pod.affinity.push_back(ParseAffinityEntry(entry));
    if (pod.owned) {
      if (!started_) {
        Report("execute pod submitted before run-start");
      } else {
        std::string filter = d.Field("start_filter").String();
        if (FormatFilter(ParseFilter(filter)) != filter_text_) {
          Report("start filter '" + filter + "' differs from the provisioner filter '" +
                 filter_text_ + "'");
        }
      }
      pod.start_filter = ParseFilter(d.Field("start_filter").String());
      pod.advertised = AttributesFromJson(d.Field("advertised"));
      if (d.Has("cycle")) CountSubmission(d.Field("cycle").Int(), pod.group);
    }
    pods_.emplace(subject_, std::move(pod));
  }

  void CountSubmission(int64_t cycle, const GroupKey& group) {
    auto it = cycles_.find(cycle);
    if (it == cycles_.end()) return Report("submission for unknown cycle " + std::to_string(cycle));
    CycleSnapshot& snap = it->second;
    int64_t n = ++snap.submitted[group];
    ++snap.submitted_total;
    int64_t deficit = snap.deficit.contains(group) ? snap.deficit.at(group) : 0;
    if (n > deficit) {
      Report("cycle " + std::to_string(cycle) + " submitted " + std::to_string(n) +
             " pods for " + group.ToString() + " against a deficit of " + std::to_string(deficit));
    }
    int64_t existing = snap.existing.contains(group) ? snap.existing.at(group) : 0;
    if (existing + n > config_.max_pods_per_group) Report("max_pods_per_group exceeded");
    if (snap.submitted_total > config_.max_submit_per_cycle) Report("max_submit_per_cycle exceeded");
    if (snap.existing_total + snap.submitted_total > config_.max_total_pods) {
      Report("max_total_pods exceeded");
    }
  }

  void ProvisionerCycle() {
    CycleSnapshot snap;
    GroupCounts idle;
    for (const auto& [id, job] : jobs_) {
      if (job.state == JobState::kIdle && EvalFilter(config_.filter, job.attributes)) {
        ++idle[GroupKeyOf(job.request, config_.mem_quantum_mib, config_.disk_quantum_mib)];
      }
    }
    GroupCounts pending;
    for (const auto& [name, pod] : pods_) {
      if (!pod.owned || IsTerminal(pod.phase)) continue;
      ++snap.existing[pod.group];
      ++snap.existing_total;
      if (pod.phase == PodPhase::kPending) ++pending[pod.group];
    }
    for (const auto& [group, n] : idle) {
      int64_t p = pending.contains(group) ? pending.at(group) : 0;
      if (n > p) snap.deficit[group] = n - p;
    }
    cycles_[SubjectId()] = std::move(snap);
  }

  void Bind(const JsonReader& d) {
    PodRecord* pod = FindPod();
    if (pod == nullptr) return;
    if (pod->phase != PodPhase::kPending) return Report("bind of a pod that is not pending");
    std::string node_id = d.Field("node").String();
    auto node = nodes_.find(node_id);
    if (node == nodes_.end()) return Report("bind to unknown node " + node_id);
    if (time_ < node->second.ready_time) Report("bind to node " + node_id + " before it is ready");
    ResourceVector used = pod->request;
    for (const auto& [name, other] : pods_) {
      if (other.phase == PodPhase::kRunning && other.node == node_id) used += other.request;
    }
    if (!Fits(used, node->second.capacity)) {
      Report("node " + node_id + " overcommitted: " + used.ToString() + " of " +
             node->second.capacity.ToString());
    }
    if (!ToleratesAll(pod->tolerations, node->second.taints)) {
      Report("pod does not tolerate the taints of " + node_id);
    }
    if (!AffinitySatisfied(pod->affinity, node->second.labels)) {
      Report("pod affinity not satisfied by " + node_id);
    }
    pod->phase = PodPhase::kRunning;
    pod->node = node_id;
  }

  void Preempt(const JsonReader& d) {
    PodRecord* victim = FindPod();
    if (victim == nullptr) return;
    std::string preemptor_name = d.Field("preemptor").String();
    auto preemptor = pods_.find(preemptor_name);
    if (preemptor == pods_.end()) return Report("unknown preemptor " + preemptor_name);
    if (victim->phase != PodPhase::kRunning) Report("victim is not running");
    if (victim->node != d.Field("node").String()) Report("victim is not on the preemption node");
    if (victim->priority >= preemptor->second.priority) {
      Report("victim priority " + std::to_string(victim->priority) +
             " is not below preemptor priority " + std::to_string(preemptor->second.priority));
    }
  }

  void PodFail() {
    PodRecord* pod = FindPod();
    if (pod == nullptr) return;
    if (IsTerminal(pod->phase)) return Report("pod already terminal");
    pod->phase = PodPhase::kFailed;
    if (pod->job) unreleased_ = subject_;
  }

  void JobPreempt(const JsonReader& d) {
    JobRecord* job = FindJob();
    if (job == nullptr) return;
    std::string pod_name = d.Field("pod").String();
    if (job->state != JobState::kRunning || job->pod != pod_name) {
      return Report("job is not running on " + pod_name);
    }
    auto pod = pods_.find(pod_name);
    if (pod == pods_.end() || pod->second.phase != PodPhase::kFailed) {
      Report("job preempted from a pod that did not fail");
    } else {
      pod->second.job.reset();
    }
    job->state = JobState::kIdle;
    job->pod.reset();
    released_ = true;
  }

  void JobStart(const JsonReader& d) {
    JobRecord* job = FindJob();
    if (job == nullptr) return;
    std::string pod_name = d.Field("pod").String();
    auto it = pods_.find(pod_name);
    if (it == pods_.end()) return Report("job started on unknown pod " + pod_name);
    PodRecord& pod = it->second;
    if (job->state != JobState::kIdle) return Report("job started while not idle");
    if (pod.phase != PodPhase::kRunning || !pod.owned) {
      return Report("job started on " + pod_name + ", which is not a running execute pod");
    }
    if (pod.job) return Report("slot " + pod_name + " already runs a job");
    if (!Fits(job->request, pod.request)) Report("job request exceeds slot " + pod_name);
    if (!EvalFilter(pod.start_filter, job->attributes)) {
      Report("job does not satisfy the start filter of " + pod_name);
    }
    if (!EvalFilter(job->requirements, pod.advertised)) {
      Report("slot " + pod_name + " does not satisfy the job requirements");
    }
    job->state = JobState::kRunning;
    job->pod = pod_name;
    pod.job = SubjectId();
  }

  void JobComplete(const JsonReader& d) {
    JobRecord* job = FindJob();
    if (job == nullptr) return;
    std::string pod_name = d.Field("pod").String();
    if (job->state != JobState::kRunning || job->pod != pod_name) {
      return Report("job completed while not running on " + pod_name);
    }
    job->state = JobState::kCompleted;
    job->pod.reset();
    pods_.at(pod_name).job.reset();
  }

  void PodTerminate() {
    PodRecord* pod = FindPod();
    if (pod == nullptr) return;
    if (pod->phase != PodPhase::kRunning) return Report("terminated pod was not running");
    if (pod->job) Report("pod terminated while running a job");
    pod->phase = PodPhase::kSucceeded;
  }

  void PodDelete() {
    PodRecord* pod = FindPod();
    if (pod == nullptr) return;
    if (!IsTerminal(pod->phase)) return Report("deleted pod is not terminal");
    pods_.erase(subject_);
  }

  void NodeAdd(const JsonReader& d) {
    if (nodes_.contains(subject_)) return Report("duplicate node");
    NodeRecord node;
    node.capacity = ResourcesFromJson(d.Field("capacity"));
    node.labels = AttributesFromJson(d.Field("labels"));
    node.taints = Strings(d.Field("taints"));
    node.ready_time = d.Field("ready_time").Int();
    nodes_.emplace(subject_, std::move(node));
  }

  void NodeReady() {
    auto it = nodes_.find(subject_);
    if (it == nodes_.end()) return Report("unknown node");
    if (it->second.ready_time != time_) Report("node ready at an unexpected time");
  }

  void NodeRemove() {
    if (!nodes_.contains(subject_)) return Report("unknown node");
    for (const auto& [name, pod] : pods_) {
      if (pod.phase == PodPhase::kRunning && pod.node == subject_) {
        Report("scale-down removed a node still running " + name);
      }
    }
    nodes_.erase(subject_);
  }

  void NodeKill(const JsonReader& d) {
    if (!nodes_.contains(subject_)) return Report("unknown node");
    std::vector<std::string> listed = Strings(d.Field("pods"));
    std::set<std::string> expected;
    for (const auto& [name, pod] : pods_) {
      if (pod.phase == PodPhase::kRunning && pod.node == subject_) expected.insert(name);
    }
    if (std::set<std::string>(listed.begin(), listed.end()) != expected) {
      Report("node-kill pod list does not match the pods running on the node");
    }
    nodes_.erase(subject_);
  }

  void RunEnd(const JsonReader& d) {
    std::map<JobState, int64_t> counts;
    for (const auto& [id, job] : jobs_) ++counts[job.state];
    auto expect = [&](const char* field, int64_t actual) {
      int64_t logged = d.Field(field).Int();
      if (logged != actual) {
        Report(std::string(field) + " is " + std::to_string(logged) + ", replay gives " +
               std::to_string(actual));
      }
    };
    expect("jobs_submitted", submitted_);
    expect("idle", counts[JobState::kIdle]);
    expect("running", counts[JobState::kRunning]);
    expect("completed", counts[JobState::kCompleted]);
    expect("removed", counts[JobState::kRemoved]);
  }

  JobId SubjectId() const {
    try {
      size_t used = 0;
      JobId id = std::stoll(subject_, &used);
      if (used == subject_.size()) return id;
    } catch (const std::exception&) {
    }
    throw SchemaError("subject", "expected an integer id, got '" + subject_ + "'");
  }

  JobRecord* FindJob() {
    auto it = jobs_.find(SubjectId());
    if (it == jobs_.end()) {
      Report("unknown job");
      return nullptr;
    }
    return &it->second;
  }

  PodRecord* FindPod() {
    auto it = pods_.find(subject_);
    if (it == pods_.end()) {
      Report("unknown pod");
      return nullptr;
    }
    return &it->second;
  }

  void Report(const std::string& message) {
    violations_.push_back("seq " + std::to_string(seq_) + " (" + kind_ + " " + subject_ +
                          "): " + message);
  }

  ProvisionerConfig config_;
  std::string filter_text_;
  bool started_ = false;
  std::map<JobId, JobRecord> jobs_;
  std::map<std::string, PodRecord> pods_;
  std::map<std::string, NodeRecord> nodes_;
  std::map<int64_t, CycleSnapshot> cycles_;
  int64_t submitted_ = 0;
  std::optional<std::string> unreleased_;
  bool released_ = false;

  SimTime time_ = 0;
  int64_t seq_ = 0;
  std::string kind_;
  std::string subject_;
  std::optional<int64_t> last_seq_;
  SimTime last_time_ = 0;
  std::vector<std::string> violations_;
};

}  // namespace

CheckReport CheckEventLog(std::string_view jsonl) {
  Replayer replayer;
  CheckReport report;
  int64_t line_no = 0;
  size_t pos = 0;
  while (pos < jsonl.size()) {
    size_t end = jsonl.find('\n', pos);
    if (end == std::string_view::npos) end = jsonl.size();
    std::string_view line = jsonl.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    Json value = Json::parse(line, nullptr, false);
    if (value.is_discarded()) {
      throw SchemaError("line " + std::to_string(line_no), "not valid JSON");
    }
    replayer.Apply(value, line_no);
    ++report.events;
  }
  report.violations = replayer.TakeViolations();
  return report;
}

}  // namespace kprov
