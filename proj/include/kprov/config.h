#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kprov/filter.h"
#include "kprov/model.h"

namespace kprov {

/// Environment variable carrying the batch central-manager location into
/// every execute pod.
inline constexpr const char* kCentralManagerEnv = "CONDOR_HOST";

std::map<std::string, int64_t> DefaultPriorityTable();

struct ProvisionerConfig {
  std::string k8s_domain = "cluster.local";
  std::string namespace_ = "htcondor";
  std::string image = "htcondor/execute:centos-gpu";
  std::string priority_class = "normal";
  std::map<std::string, int64_t> priority_table = DefaultPriorityTable();
  std::vector<std::string> tolerations;
  std::vector<AffinityRule> affinity;
  std::vector<std::pair<std::string, std::string>> env;
  std::string secret_name = "htcondor-credentials";
  std::string central_manager = "htcondor-cm";
  FilterExpr filter;
  int64_t mem_quantum_mib = 1024;
  int64_t disk_quantum_mib = 1024;
  SimTime cycle_interval_s = 60;
  SimTime idle_timeout_s = 600;
  int64_t max_submit_per_cycle = 50;
  int64_t max_pods_per_group = 1000;
  int64_t max_total_pods = 5000;
  SimTime completed_pod_ttl_s = 3600;

  bool operator==(const ProvisionerConfig&) const = default;
};

/// Parses the INI configuration. Sections [DEFAULT] and [k8s] are read, with
/// [k8s] winning; within a section the last duplicate key wins. Unknown keys
/// and sections are reported through `warnings` (if non-null) and ignored.
/// Throws MalformedIni, InvalidValue (including UnknownPriorityClass) and
/// FilterSyntax.
ProvisionerConfig ParseIni(std::string_view text, std::vector<std::string>* warnings = nullptr);

/// "^key:v1|v2" -> negated rule. Throws InvalidValue.
AffinityRule ParseAffinityEntry(std::string_view entry);
std::string FormatAffinityEntry(const AffinityRule& rule);

/// Fully resolved config as a single [k8s] section, every key present, in a
/// fixed order. ParseIni(ToIni(c)) == c.
std::string ToIni(const ProvisionerConfig& config);

/// Throws InvalidValue on a violated invariant.
void Validate(const ProvisionerConfig& config);

}  // namespace kprov
