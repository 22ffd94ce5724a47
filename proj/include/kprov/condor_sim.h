#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "kprov/model.h"

namespace kprov {

/// Execute slot advertised by the startd inside one Running pod.
struct Slot {
  std::string pod_name;
  ResourceVector capacity;
  Attributes advertised_attributes;
  FilterExpr start_filter;
  std::optional<JobId> claimed_job;
  SimTime ready_time = 0;
  SimTime last_claim_end = 0;

  bool operator==(const Slot&) const = default;
};

struct Match {
  JobId job_id = 0;
  std::string pod_name;

  bool operator==(const Match&) const = default;
};

/// Resource dominance plus both directions of filtering: the slot's start
/// filter over the job's attributes, and the job's requirements over the
/// slot's advertised attributes.
bool Compatible(const JobAd& job, const Slot& slot);

/// Greedy FIFO matchmaking. Jobs are taken in (submit_time, job_id) order and
/// each goes to the first unclaimed compatible slot in (ready_time, pod_name)
/// order. One job per slot. Non-idle jobs are ignored.
std::vector<Match> Negotiate(const std::vector<JobAd>& idle_jobs, const std::vector<Slot>& slots,
                             SimTime now);

/// Idle -> Running on `slot`. Throws IllegalTransition if the job is not
/// idle or the slot already holds a claim.
void StartJob(JobAd& job, Slot& slot, SimTime now);

/// Running -> Completed; releases the slot. Throws IllegalTransition unless
/// `slot` holds the claim for `job`.
void CompleteJob(JobAd& job, Slot& slot, SimTime now);

/// Self-termination policy for an unclaimed slot: idle for longer than
/// `idle_timeout_s` and no idle job it could run.
bool ShouldTerminate(const Slot& slot, const std::vector<JobAd>& idle_jobs, SimTime idle_timeout_s,
                     SimTime now);

/// The batch pool: job queue plus the slots of the execute pods that have
/// joined it.
class CondorPool {
 public:
  /// Adds an idle job. Throws IllegalTransition on a duplicate id.
  void Submit(JobAd job);
  /// Registers the slot of a pod that just started running.
  void AddSlot(Slot slot);
  /// Drops an unclaimed slot (pod self-terminated). Throws IllegalTransition
  /// if the slot holds a claim.
  void RemoveSlot(const std::string& pod_name);

  /// Negotiates idle jobs against unclaimed slots and starts every match.
  std::vector<Match> NegotiateCycle(SimTime now);

  /// Completes every running job whose service demand is met by `now`, in
  /// job_id order. Returns (job, slot) pairs.
  std::vector<Match> CompleteDue(SimTime now);

  /// The slot's pod is gone. A claimed job goes back to Idle with its restart
  /// count bumped and must run again from scratch. The slot is removed.
  std::optional<JobId> PreemptSlot(const std::string& pod_name, SimTime now);

  /// Any state -> Removed; frees the slot of a running job.
  void RemoveJob(JobId job_id, SimTime now);

  /// Unclaimed slots satisfying ShouldTerminate, in pod_name order.
  std::vector<std::string> SelfTerminationCandidates(SimTime idle_timeout_s, SimTime now) const;

  std::vector<JobAd> IdleJobs() const;
  std::vector<JobAd> AllJobs() const;
  std::optional<SimTime> NextCompletion() const;
  int64_t CountJobs(JobState state) const;

  const std::map<JobId, JobAd>& jobs() const { return jobs_; }
  const std::map<std::string, Slot>& slots() const { return slots_; }

 private:
  std::map<JobId, JobAd> jobs_;
  std::map<std::string, Slot> slots_;
  std::map<JobId, std::string> running_on_;
  std::map<JobId, SimTime> finish_at_;
};

}  // namespace kprov
