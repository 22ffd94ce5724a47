#include "kprov/model.h"

#include <algorithm>

#include "kprov/errors.h"

namespace kprov {

const char* ToString(JobState state) {
  switch (state) {
    case JobState::kIdle:
      return "Idle";
    case JobState::kRunning:
      return "Running";
    case JobState::kCompleted:
      return "Completed";
    case JobState::kRemoved:
      return "Removed";
  }
  return "?";
}

JobState ParseJobState(const std::string& text) {
  if (text == "Idle") return JobState::kIdle;
  if (text == "Running") return JobState::kRunning;
  if (text == "Completed") return JobState::kCompleted;
  if (text == "Removed") return JobState::kRemoved;
  throw InvalidValue("unknown job state '" + text + "'");
}

const char* ToString(PodPhase phase) {
  switch (phase) {
    case PodPhase::kPending:
      return "Pending";
    case PodPhase::kRunning:
      return "Running";
    case PodPhase::kSucceeded:
      return "Succeeded";
    case PodPhase::kFailed:
      return "Failed";
  }
  return "?";
}

PodPhase ParsePodPhase(const std::string& text) {
  if (text == "Pending") return PodPhase::kPending;
  if (text == "Running") return PodPhase::kRunning;
  if (text == "Succeeded") return PodPhase::kSucceeded;
  if (text == "Failed") return PodPhase::kFailed;
  throw InvalidValue("unknown pod phase '" + text + "'");
}

bool AffinitySatisfied(const AffinityRule& rule, const Attributes& labels) {
  auto it = labels.find(rule.key);
  bool listed = it != labels.end() &&
                std::find(rule.values.begin(), rule.values.end(), it->second) != rule.values.end();
  return rule.negated ? !listed : listed;
}

bool AffinitySatisfied(const std::vector<AffinityRule>& rules, const Attributes& labels) {
  return std::all_of(rules.begin(), rules.end(),
                     [&](const AffinityRule& r) { return AffinitySatisfied(r, labels); });
}

bool ToleratesAll(const std::vector<std::string>& tolerations,
                  const std::vector<std::string>& taints) {
  return std::all_of(taints.begin(), taints.end(), [&](const std::string& taint) {
    return std::find(tolerations.begin(), tolerations.end(), taint) != tolerations.end();
  });
}

}  // namespace kprov
