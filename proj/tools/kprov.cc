// kprov: validate provisioner configs, run simulated scenarios, plan one
// reconcile cycle and check event logs.
//
// Exit codes: 0 success, 1 input error, 2 invariant or verification failure.

#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "kprov/config.h"
#include "kprov/errors.h"
#include "kprov/event_check.h"
#include "kprov/harness.h"
#include "kprov/json_io.h"
#include "kprov/provisioner.h"
#include "kprov/scenario.h"

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kVerifyFailed = 2;

void WriteFile(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

int Validate(const std::string& path) {
  try {
    std::vector<std::string> warnings;
    kprov::ProvisionerConfig config = kprov::ParseIni(kprov::ReadFile(path), &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    std::cout << kprov::ToIni(config);
    return kOk;
  } catch (const kprov::FilterSyntax& e) {
    std::cerr << "FilterSyntax: " << e.what() << "\n";
  } catch (const kprov::MalformedIni& e) {
    std::cerr << "MalformedIni: " << e.what() << "\n";
  } catch (const kprov::UnknownPriorityClass& e) {
    std::cerr << "UnknownPriorityClass: " << e.what() << "\n";
  } catch (const kprov::InvalidValue& e) {
    std::cerr << "InvalidValue: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return kInputError;
}

struct RunArgs {
  std::string scenario;
  std::optional<uint64_t> seed;
  std::string metrics;
  std::string events;
  std::string fault;
};

int Run(const RunArgs& args) {
  kprov::Scenario scenario;
  kprov::RunOptions options;
  options.seed_override = args.seed;
  if (args.fault == "overcommit") {
    options.fault = kprov::FaultInjection::kOvercommit;
  } else if (!args.fault.empty()) {
    std::cerr << "error: unknown fault '" << args.fault << "'\n";
    return kInputError;
  }
  try {
    scenario = kprov::LoadScenarioFile(args.scenario);
  } catch (const std::exception& e) {
    std::cerr << "SchemaError: " << e.what() << "\n";
    return kInputError;
  }
  kprov::RunResult result;
  try {
    result = kprov::Run(scenario, options);
  } catch (const kprov::InvariantViolation& e) {
    std::cerr << "InvariantViolation: " << e.what() << "\n";
    std::cerr << "event: " << e.event() << "\n";
    return kVerifyFailed;
  }
  try {
    if (!args.metrics.empty()) WriteFile(args.metrics, kprov::EmitMetrics(result.metrics));
    if (!args.events.empty()) WriteFile(args.events, kprov::EmitEvents(result.events));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kOk;
}

std::vector<kprov::JobAd> LoadJobs(const std::string& path) {
  kprov::Json doc = kprov::Json::parse(kprov::ReadFile(path));
  kprov::JsonReader in(doc, "jobs");
  in.ExpectArray();
  std::vector<kprov::JobAd> jobs;
  for (size_t i = 0; i < in.Size(); ++i) jobs.push_back(kprov::JobFromJson(in.Index(i)));
  return jobs;
}

std::vector<kprov::PodState> LoadPods(const std::string& path,
                                      const kprov::ProvisionerConfig& config) {
  kprov::Json doc = kprov::Json::parse(kprov::ReadFile(path));
  kprov::JsonReader in(doc, "pods");
  in.ExpectArray();
  std::vector<kprov::PodState> pods;
  for (size_t i = 0; i < in.Size(); ++i) {
    kprov::PodState pod =
        kprov::PodFromJson(in.Index(i), config.mem_quantum_mib, config.disk_quantum_mib);
    if (pod.spec.owned()) pods.push_back(std::move(pod));
  }
  return pods;
}

int Plan(const std::string& jobs_path, const std::string& pods_path,
         const std::string& config_path) {
  try {
    kprov::ProvisionerConfig config = kprov::ParseIni(kprov::ReadFile(config_path));
    kprov::PoolSnapshot snapshot;
    snapshot.jobs = LoadJobs(jobs_path);
    if (!pods_path.empty()) snapshot.pods = LoadPods(pods_path, config);
    kprov::ReconcileActions actions = kprov::Reconcile(snapshot, config, 1);
    kprov::GroupCounts plan;
    for (const auto& spec : actions.submissions) ++plan[spec.group];
    kprov::Json out = kprov::Json::object();
    for (const auto& [group, n] : plan) out[group.ToString()] = n;
    std::cout << out.dump() << "\n";
    return kOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
}

int Check(const std::string& path) {
  kprov::CheckReport report;
  try {
    report = kprov::CheckEventLog(kprov::ReadFile(path));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  for (const auto& v : report.violations) std::cout << v << "\n";
  if (!report.ok()) {
    std::cout << report.violations.size() << " violation(s) in " << report.events << " events\n";
    return kVerifyFailed;
  }
  std::cout << "ok: " << report.events << " events\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Demand-driven execute-pod provisioner and simulator"};
  app.require_subcommand(1);

  std::string config_path;
  auto* validate = app.add_subcommand("validate", "Parse a config and print it fully resolved");
  validate->add_option("config", config_path, "INI config file")->required();

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "Simulate a scenario");
  run->add_option("scenario", run_args.scenario, "Scenario JSON file")->required();
  run->add_option("--seed", run_args.seed, "Override the scenario seed");
  run->add_option("--metrics", run_args.metrics, "Metrics CSV output path");
  run->add_option("--events", run_args.events, "Event log JSONL output path");
  run->add_option("--inject-fault", run_args.fault)->group("");

  std::string jobs_path;
  std::string pods_path;
  std::string plan_config;
  auto* plan = app.add_subcommand("plan", "Print the submissions one reconcile cycle would make");
  plan->add_option("--jobs", jobs_path, "JSON list of job ads")->required();
  plan->add_option("--pods", pods_path, "JSON list of pods");
  plan->add_option("--config", plan_config, "INI config file")->required();

  std::string events_path;
  auto* check = app.add_subcommand("check", "Replay an event log through the invariant checks");
  check->add_option("--events", events_path, "Event log JSONL")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  if (*validate) return Validate(config_path);
  if (*run) return Run(run_args);
  if (*plan) return Plan(jobs_path, pods_path, plan_config);
  return Check(events_path);
}
