#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace kprov {

struct CheckReport {
  int64_t events = 0;
  // One line per violation: "seq N (kind subject): message".
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
};

/// Replays a JSONL event log and rebuilds job, pod and node state from the
/// log alone, checking clock order, legal job and pod transitions, filter
/// propagation, node capacity, taints and affinity at bind, preemption
/// direction, slot compatibility at job start, per-cycle submissions against
/// the snapshot deficit and the caps, and job conservation at run end.
///
/// Throws SchemaError for a line that is not an event object. An empty log
/// is clean.
CheckReport CheckEventLog(std::string_view jsonl);

}  // namespace kprov
