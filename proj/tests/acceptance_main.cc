// Acceptance gate: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>

#include "kprov/config.h"
#include "kprov/errors.h"
#include "kprov/event_check.h"
#include "kprov/harness.h"
#include "kprov/k8s_sim.h"
#include "kprov/scenario.h"
#include "oracles.h"
#include "test_util.h"

namespace kprov {
namespace {

const std::vector<std::string> kScenarios = {"minimal",        "scale_up_burst", "scale_to_zero",
                                             "gpu_autoscale", "preemption",     "spot_kills"};

Scenario Fixture(const std::string& name) {
  return LoadScenarioFile(std::string(KPROV_SCENARIO_DIR "/") + name + ".json");
}

struct Outcome {
  bool pass = true;
  std::string note;

  void Require(bool ok, const std::string& what) {
    if (!ok && pass) note = what;
    pass = pass && ok;
  }
};

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

std::vector<const EventRecord*> OfKind(const RunResult& r, const std::string& kind) {
  std::vector<const EventRecord*> out;
  for (const auto& e : r.events) {
    if (e.kind == kind) out.push_back(&e);
  }
  return out;
}

bool Conserved(const RunResult& r) {
  const Json& d = OfKind(r, "run-end").back()->detail;
  return d["jobs_submitted"].get<int64_t>() ==
         d["idle"].get<int64_t>() + d["running"].get<int64_t>() + d["completed"].get<int64_t>() +
             d["removed"].get<int64_t>();
}

Outcome GoldenConfig() {
  Outcome o;
  auto start = std::chrono::steady_clock::now();
  ProvisionerConfig c = ParseIni(ReadFile(KPROV_FIXTURE_DIR "/nautilus.ini"));
  using Env = std::vector<std::pair<std::string, std::string>>;
  o.Require(c.k8s_domain == "nrp-nautilus.io", "k8s_domain");
  o.Require(c.tolerations ==
                std::vector<std::string>{"nautilus.io/noceph", "nautilus.io/suncave"},
            "tolerations");
  o.Require(c.priority_class == "opportunistic", "priority_class");
  o.Require(c.env == Env{{"USE_SINGULARITY", "no"}, {"GLIDEIN_Site", "SDSC-PRP"}}, "env");
  o.Require(c.affinity.size() == 2 &&
                c.affinity[0] == AffinityRule{"nautilus.io/low-power", {"true"}, true} &&
                c.affinity[1] == AffinityRule{"gpu-type", {"A100", "A40", "V100"}, false},
            "affinity");
  o.Require(c.filter.clauses.empty(), "filter");
  std::string resolved = ToIni(c);
  o.Require(resolved == ReadFile(KPROV_GOLDEN_DIR "/nautilus_resolved.ini"), "resolved output");
  o.Require(ToIni(ParseIni(resolved)) == resolved, "resolved output is a fixed point");
  double secs = Seconds(start);
  o.Require(secs < 1.0, "runtime");
  o.note += std::to_string(secs) + " s";
  return o;
}

Outcome ScaleUpExactness() {
  Outcome o;
  auto start = std::chrono::steady_clock::now();
  RunResult r = Run(Fixture("scale_up_burst"));
  std::set<std::string> groups;
  for (const auto* e : OfKind(r, "pod-submit")) groups.insert(e->detail["group"].get<std::string>());
  o.Require(OfKind(r, "pod-submit").size() == 50, "pod-submit count");
  o.Require(groups.size() == 1, "single group");
  o.Require(r.jobs_submitted == 50 && r.jobs_completed == 50, "all jobs completed");
  o.Require(CheckEventLog(EmitEvents(r.events)).ok(), "event log check");
  double secs = Seconds(start);
  o.Require(secs < 5.0, "runtime");
  o.note += std::to_string(secs) + " s";
  return o;
}

Outcome ScaleToZero() {
  Outcome o;
  Scenario s = Fixture("scale_to_zero");
  RunResult r = Run(s);
  SimTime last_completion = 0;
  for (const auto* e : OfKind(r, "job-complete")) last_completion = e->time;
  o.Require(r.jobs_completed == r.jobs_submitted, "all jobs completed");

  // Replay owned running pods and nodes to find when each reached zero.
  std::set<std::string> owned_running;
  std::set<std::string> owned;
  int64_t nodes = 0;
  SimTime pods_zero_at = -1;
  SimTime nodes_zero_at = -1;
  for (const auto& e : r.events) {
    if (e.kind == "pod-submit" && e.detail["owned"].get<bool>()) owned.insert(e.subject);
    if (e.kind == "bind" && owned.contains(e.subject)) owned_running.insert(e.subject);
    if ((e.kind == "pod-terminate" || e.kind == "pod-fail") && owned_running.erase(e.subject) &&
        owned_running.empty()) {
      pods_zero_at = e.time;
    }
    if (e.kind == "node-add") ++nodes;
    if ((e.kind == "node-remove" || e.kind == "node-kill") && --nodes == 0) nodes_zero_at = e.time;
  }
  const MetricsSample& last = r.metrics.back();
  o.Require(last.running_pods == 0 && last.pending_pods == 0, "owned pods remain at horizon");
  o.Require(last.nodes_total == 0, "nodes remain at horizon");
  SimTime pod_deadline = last_completion + s.config.idle_timeout_s + 2 * s.config.cycle_interval_s;
  o.Require(pods_zero_at >= last_completion && pods_zero_at <= pod_deadline,
            "running_pods reached 0 at " + std::to_string(pods_zero_at) + ", deadline " +
                std::to_string(pod_deadline));
  SimTime node_deadline = pods_zero_at + s.autoscaler.scale_down_idle_s;
  o.Require(nodes_zero_at >= 0 && nodes_zero_at <= node_deadline,
            "nodes_total reached 0 at " + std::to_string(nodes_zero_at) + ", deadline " +
                std::to_string(node_deadline));
  if (o.pass) {
    o.note = "last completion " + std::to_string(last_completion) + ", pods 0 at " +
             std::to_string(pods_zero_at) + ", nodes 0 at " + std::to_string(nodes_zero_at);
  }
  return o;
}

Outcome GpuAutoscale() {
  Outcome o;
  Scenario s = Fixture("gpu_autoscale");
  RunResult r = Run(s);
  int64_t peak = 0;
  bool fragmented = false;
  for (const auto& m : r.metrics) {
    peak = std::max(peak, m.nodes_total);
    if (m.idle_jobs == 0 && m.gpus_allocated > 0 && m.gpus_allocated < m.gpus_capacity) {
      fragmented = true;
    }
  }
  std::vector<int64_t> sizes(s.workload[0].count, s.workload[0].request.gpus);
  int64_t expected = testing::FirstFitDecreasingBins(sizes, s.shapes[0].capacity.gpus);
  o.Require(expected == 3, "FFD oracle gives " + std::to_string(expected));
  o.Require(peak == expected, "peak nodes_total " + std::to_string(peak));
  o.Require(fragmented, "no sample with 0 < gpus_allocated < gpus_capacity during drain");
  o.Require(r.metrics.back().nodes_total == 0, "final nodes_total");
  o.Require(r.jobs_completed == 21, "all jobs completed");
  if (o.pass) o.note = "peak " + std::to_string(peak);
  return o;
}

Outcome PreemptionCorrectness() {
  Outcome o;
  RunResult r = Run(Fixture("preemption"));
  auto preempts = OfKind(r, "preempt");
  o.Require(!preempts.empty(), "no preemption happened");
  for (const auto* e : preempts) {
    o.Require(e->detail["victim_priority"].get<int64_t>() <
                  e->detail["preemptor_priority"].get<int64_t>(),
              "victim priority not lower at seq " + std::to_string(e->seq));
  }
  std::set<std::string> completed;
  for (const auto* e : OfKind(r, "job-complete")) completed.insert(e->subject);
  auto job_preempts = OfKind(r, "job-preempt");
  o.Require(!job_preempts.empty(), "no job was preempted");
  for (const auto* e : job_preempts) {
    o.Require(completed.contains(e->subject), "preempted job " + e->subject + " never completed");
  }
  o.Require(r.jobs_completed == r.jobs_submitted, "all jobs completed");
  o.Require(Conserved(r), "job conservation");
  o.Require(CheckEventLog(EmitEvents(r.events)).ok(), "event log check");
  if (o.pass) {
    o.note = std::to_string(preempts.size()) + " evictions, " +
             std::to_string(job_preempts.size()) + " job preemptions";
  }
  return o;
}

Outcome SpotKillRobustness() {
  Outcome o;
  auto start = std::chrono::steady_clock::now();
  Scenario s = Fixture("spot_kills");
  int64_t kills = 0;
  for (uint64_t seed = 1; seed <= 100; ++seed) {
    RunOptions options;
    options.seed_override = seed;
    try {
      RunResult r = Run(s, options);
      kills += OfKind(r, "node-kill").size();
      o.Require(r.jobs_submitted == r.jobs_completed + r.jobs_removed,
                "job loss with seed " + std::to_string(seed));
      o.Require(CheckEventLog(EmitEvents(r.events)).ok(),
                "event log check with seed " + std::to_string(seed));
    } catch (const InvariantViolation& e) {
      o.Require(false, "seed " + std::to_string(seed) + ": " + e.what());
    }
  }
  o.Require(kills > 0, "no node was killed");
  double secs = Seconds(start);
  o.Require(secs < 60.0, "runtime");
  o.note += std::to_string(kills) + " kills, " + std::to_string(secs) + " s";
  return o;
}

Outcome SchedulerOracle() {
  Outcome o;
  std::mt19937 rng(2021);
  int feasible = 0;
  for (int iter = 0; iter < 500; ++iter) {
    ClusterState cluster;
    std::vector<Node> nodes;
    int node_count = 1 + rng() % 3;
    for (int n = 0; n < node_count; ++n) {
      Node node = testing::ReadyNode("n" + std::to_string(n),
                                     testing::Res(1000 * (rng() % 9), rng() % 8, 1024 * (rng() % 9)));
      if (rng() % 4 == 0) node.taints = {"dedicated"};
      if (rng() % 2 == 0) node.labels["gpu-type"] = rng() % 2 ? "A100" : "V100";
      nodes.push_back(node);
      cluster.AddNode(node);
    }
    std::vector<PodSpec> pods;
    int pod_count = 1 + rng() % 6;
    for (int p = 0; p < pod_count; ++p) {
      PodSpec pod = testing::SimplePod(
          "p" + std::to_string(p),
          testing::Res(1000 * (rng() % 4), rng() % 4, 1024 * (rng() % 4)), rng() % 3);
      if (rng() % 3 == 0) pod.tolerations = {"dedicated"};
      if (rng() % 4 == 0) pod.affinity = {AffinityRule{"gpu-type", {"A100"}, rng() % 2 == 0}};
      pods.push_back(pod);
      cluster.SubmitPod(pod, 0);
    }
    cluster.Schedule(0);
    bool all_placed = std::all_of(cluster.pods().begin(), cluster.pods().end(),
                                  [](const auto& kv) { return kv.second.phase == PodPhase::kRunning; });
    bool oracle = testing::ExhaustiveFullAssignment(pods, nodes);
    feasible += oracle;
    o.Require(all_placed == oracle, "disagreement on instance " + std::to_string(iter));
  }
  o.note += std::to_string(feasible) + " of 500 instances feasible";
  return o;
}

Outcome NeverOverSubmit() {
  Outcome o;
  int64_t events = 0;
  for (const auto& name : kScenarios) {
    CheckReport report = CheckEventLog(EmitEvents(Run(Fixture(name)).events));
    events += report.events;
    o.Require(report.ok(), name + ": " + (report.ok() ? "" : report.violations.front()));
  }
  o.note += std::to_string(events) + " events checked";
  return o;
}

Outcome Determinism() {
  Outcome o;
  for (const auto& name : kScenarios) {
    Scenario s = Fixture(name);
    RunResult a = Run(s);
    RunResult b = Run(s);
    o.Require(EmitEvents(a.events) == EmitEvents(b.events), name + " events differ");
    o.Require(EmitMetrics(a.metrics) == EmitMetrics(b.metrics), name + " metrics differ");
  }
  RunResult gpu = Run(Fixture("gpu_autoscale"));
  o.Require(EmitEvents(gpu.events) == ReadFile(KPROV_GOLDEN_DIR "/gpu_autoscale.events.jsonl"),
            "gpu_autoscale events differ from the golden log");
  o.Require(EmitMetrics(gpu.metrics) == ReadFile(KPROV_GOLDEN_DIR "/gpu_autoscale.metrics.csv"),
            "gpu_autoscale metrics differ from the golden CSV");
  return o;
}

}  // namespace
}  // namespace kprov

int main() {
  using kprov::Outcome;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"golden config", kprov::GoldenConfig},
      {"scale-up exactness", kprov::ScaleUpExactness},
      {"scale-to-zero", kprov::ScaleToZero},
      {"gpu autoscale", kprov::GpuAutoscale},
      {"preemption correctness", kprov::PreemptionCorrectness},
      {"spot-kill robustness", kprov::SpotKillRobustness},
      {"scheduler oracle", kprov::SchedulerOracle},
      {"never-over-submit", kprov::NeverOverSubmit},
      {"determinism", kprov::Determinism},
  };
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.note = std::string("exception: ") + e.what();
    }
    failed += !o.pass;
    std::printf("%s %zu %s%s%s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.note.empty() ? "" : ": ", o.note.c_str());
  }
  std::fflush(stdout);
  return failed == 0 ? 0 : 1;
}
