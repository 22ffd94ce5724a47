#include "kprov/provisioner.h"

#include <algorithm>
#include <cstdio>
#include <tuple>

#include "kprov/errors.h"

namespace kprov {

namespace {

int64_t CountOr0(const GroupCounts& counts, const GroupKey& key) {
  auto it = counts.find(key);
  return it == counts.end() ? 0 : it->second;
}

GroupCounts CountPhase(const std::vector<PodState>& pods, PodPhase phase) {
  GroupCounts counts;
  for (const auto& pod : pods) {
    if (pod.phase == phase) ++counts[pod.spec.group];
  }
  return counts;
}

std::string FormatCpus(int64_t cpus_milli) {
  if (cpus_milli % 1000 == 0) return std::to_string(cpus_milli / 1000);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%lld.%03lld", static_cast<long long>(cpus_milli / 1000),
                static_cast<long long>(cpus_milli % 1000));
  std::string out = buf;
  while (out.back() == '0') out.pop_back();
  return out;
}

}  // namespace

std::vector<JobAd> SelectCandidateJobs(const std::vector<JobAd>& jobs, const FilterExpr& filter) {
  std::vector<JobAd> out;
  for (const auto& job : jobs) {
    if (job.state == JobState::kIdle && EvalFilter(filter, job.attributes)) out.push_back(job);
  }
  std::sort(out.begin(), out.end(), [](const JobAd& a, const JobAd& b) {
    return std::tie(a.submit_time, a.job_id) < std::tie(b.submit_time, b.job_id);
  });
  return out;
}

GroupCounts DemandByGroup(const std::vector<JobAd>& candidates, const ProvisionerConfig& config) {
  GroupCounts demand;
  for (const auto& job : candidates) {
    ++demand[GroupKeyOf(job.request, config.mem_quantum_mib, config.disk_quantum_mib)];
  }
  return demand;
}

GroupCounts PendingByGroup(const std::vector<PodState>& pods) {
  return CountPhase(pods, PodPhase::kPending);
}

GroupCounts RunningByGroup(const std::vector<PodState>& pods) {
  return CountPhase(pods, PodPhase::kRunning);
}

GroupCounts PlanSubmissions(const GroupCounts& demand, const GroupCounts& pending,
                            const GroupCounts& running, const ProvisionerConfig& config) {
  int64_t existing = 0;
  for (const auto& [key, n] : pending) existing += n;
  for (const auto& [key, n] : running) existing += n;
  int64_t budget =
      std::min(config.max_submit_per_cycle, std::max<int64_t>(0, config.max_total_pods - existing));

  struct Want {
    GroupKey key;
    int64_t raw;    // deficit before any cap
    int64_t limit;  // after the per-group cap
  };
  std::vector<Want> wants;
  for (const auto& [key, n] : demand) {
    int64_t raw = std::max<int64_t>(0, n - CountOr0(pending, key));
    int64_t room = config.max_pods_per_group - CountOr0(pending, key) - CountOr0(running, key);
    int64_t limit = std::min(raw, std::max<int64_t>(0, room));
    if (limit > 0) wants.push_back({key, raw, limit});
  }
  std::stable_sort(wants.begin(), wants.end(), [](const Want& a, const Want& b) {
    if (a.raw != b.raw) return a.raw > b.raw;
    return a.key < b.key;
  });

  GroupCounts plan;
  // Water-fill: whole rounds while every remaining group can take one more,
  // then a final partial round in priority order.
  std::vector<int64_t> given(wants.size(), 0);
  while (budget > 0) {
    std::vector<size_t> open;
    for (size_t i = 0; i < wants.size(); ++i) {
      if (given[i] < wants[i].limit) open.push_back(i);
    }
    if (open.empty()) break;
    int64_t headroom = wants[open.front()].limit - given[open.front()];
    for (size_t i : open) headroom = std::min(headroom, wants[i].limit - given[i]);
    int64_t rounds = std::min(headroom, budget / static_cast<int64_t>(open.size()));
    if (rounds == 0) {
      for (size_t i : open) {
        if (budget == 0) break;
        ++given[i];
        --budget;
      }
      break;
    }
    for (size_t i : open) given[i] += rounds;
    budget -= rounds * static_cast<int64_t>(open.size());
  }
  for (size_t i = 0; i < wants.size(); ++i) {
    if (given[i] > 0) plan[wants[i].key] = given[i];
  }
  return plan;
}

std::string PodName(const ProvisionerConfig& config, const GroupKey& group, int64_t seq) {
  char suffix[24];
  std::snprintf(suffix, sizeof suffix, "%06lld", static_cast<long long>(seq));
  return config.namespace_ + "-exec-" + group.ToString() + "-" + suffix;
}

PodSpec RenderPod(const GroupKey& group, const ProvisionerConfig& config, int64_t seq,
                  SimTime /*now*/) {
  auto priority = config.priority_table.find(config.priority_class);
  if (priority == config.priority_table.end()) {
    throw UnknownPriorityClass("priority class '" + config.priority_class + "' is not defined");
  }
  PodSpec spec;
  spec.pod_name = PodName(config, group, seq);
  spec.group = group;
  spec.request = group.ToVector();
  spec.priority = priority->second;
  spec.tolerations = config.tolerations;
  spec.affinity = config.affinity;
  spec.env = config.env;
  spec.env.emplace_back(kCentralManagerEnv, config.central_manager);
  spec.secret_refs = {config.secret_name};
  spec.image = config.image;
  spec.start_filter = config.filter;
  spec.owner_label = kOwnerLabel;
  for (const auto& [name, value] : config.env) {
    if (name.starts_with("GLIDEIN_")) spec.advertised_attributes[name] = value;
  }
  spec.advertised_attributes["Cpus"] = FormatCpus(group.cpus_milli);
  spec.advertised_attributes["GPUs"] = std::to_string(group.gpus);
  spec.advertised_attributes["Memory"] = std::to_string(group.memory_mib);
  spec.advertised_attributes["Disk"] = std::to_string(group.disk_mib);
  return spec;
}

ReconcileActions Reconcile(const PoolSnapshot& snapshot, const ProvisionerConfig& config,
                           int64_t first_seq) {
  ReconcileActions actions;
  auto demand = DemandByGroup(SelectCandidateJobs(snapshot.jobs, config.filter), config);
  auto plan = PlanSubmissions(demand, PendingByGroup(snapshot.pods),
                              RunningByGroup(snapshot.pods), config);
  int64_t seq = first_seq;
  for (const auto& [group, count] : plan) {
    for (int64_t i = 0; i < count; ++i) {
      actions.submissions.push_back(RenderPod(group, config, seq++, snapshot.now));
    }
  }
  std::vector<const PodState*> expired;
  for (const auto& pod : snapshot.pods) {
    if (IsTerminal(pod.phase) && snapshot.now - pod.terminated_time > config.completed_pod_ttl_s) {
      expired.push_back(&pod);
    }
  }
  std::sort(expired.begin(), expired.end(), [](const PodState* a, const PodState* b) {
    return a->spec.pod_name < b->spec.pod_name;
  });
  for (const PodState* pod : expired) actions.deletions.push_back(pod->spec.pod_name);
  return actions;
}

}  // namespace kprov
