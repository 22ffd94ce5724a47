#include "kprov/condor_sim.h"

#include <algorithm>
#include <tuple>

#include "kprov/errors.h"

namespace kprov {

bool Compatible(const JobAd& job, const Slot& slot) {
  return Fits(job.request, slot.capacity) && EvalFilter(slot.start_filter, job.attributes) &&
         EvalFilter(job.requirements, slot.advertised_attributes);
}

std::vector<Match> Negotiate(const std::vector<JobAd>& idle_jobs, const std::vector<Slot>& slots,
                             SimTime /*now*/) {
  std::vector<const JobAd*> jobs;
  for (const auto& job : idle_jobs) {
    if (job.state == JobState::kIdle) jobs.push_back(&job);
  }
  std::sort(jobs.begin(), jobs.end(), [](const JobAd* a, const JobAd* b) {
    return std::tie(a->submit_time, a->job_id) < std::tie(b->submit_time, b->job_id);
  });
  std::vector<const Slot*> free;
  for (const auto& slot : slots) {
    if (!slot.claimed_job) free.push_back(&slot);
  }
  std::sort(free.begin(), free.end(), [](const Slot* a, const Slot* b) {
    return std::tie(a->ready_time, a->pod_name) < std::tie(b->ready_time, b->pod_name);
  });

  std::vector<Match> matches;
  std::vector<bool> taken(free.size(), false);
  for (const JobAd* job : jobs) {
    for (size_t i = 0; i < free.size(); ++i) {
      if (!taken[i] && Compatible(*job, *free[i])) {
        taken[i] = true;
        matches.push_back({job->job_id, free[i]->pod_name});
        break;
      }
    }
  }
  return matches;
}

void StartJob(JobAd& job, Slot& slot, SimTime /*now*/) {
  if (job.state != JobState::kIdle) {
    throw IllegalTransition("job " + std::to_string(job.job_id) + " is " + ToString(job.state) +
                            ", cannot start");
  }
  if (slot.claimed_job) {
    throw IllegalTransition("slot " + slot.pod_name + " already runs job " +
                            std::to_string(*slot.claimed_job));
  }
  job.state = JobState::kRunning;
  slot.claimed_job = job.job_id;
}

void CompleteJob(JobAd& job, Slot& slot, SimTime now) {
  if (job.state != JobState::kRunning || slot.claimed_job != job.job_id) {
    throw IllegalTransition("job " + std::to_string(job.job_id) + " is not running on slot " +
                            slot.pod_name);
  }
  job.state = JobState::kCompleted;
  slot.claimed_job.reset();
  slot.last_claim_end = now;
}

bool ShouldTerminate(const Slot& slot, const std::vector<JobAd>& idle_jobs, SimTime idle_timeout_s,
                     SimTime now) {
  if (slot.claimed_job) return false;
  if (now - std::max(slot.ready_time, slot.last_claim_end) <= idle_timeout_s) return false;
  return std::none_of(idle_jobs.begin(), idle_jobs.end(), [&](const JobAd& job) {
    return job.state == JobState::kIdle && Compatible(job, slot);
  });
}

void CondorPool::Submit(JobAd job) {
  if (jobs_.contains(job.job_id)) {
    throw IllegalTransition("duplicate job id " + std::to_string(job.job_id));
  }
  job.state = JobState::kIdle;
  jobs_.emplace(job.job_id, std::move(job));
}

void CondorPool::AddSlot(Slot slot) {
  std::string name = slot.pod_name;
  if (!slots_.emplace(name, std::move(slot)).second) {
    throw IllegalTransition("duplicate slot " + name);
  }
}

void CondorPool::RemoveSlot(const std::string& pod_name) {
  auto it = slots_.find(pod_name);
  if (it == slots_.end()) return;
  if (it->second.claimed_job) {
    throw IllegalTransition("slot " + pod_name + " still runs a job");
  }
  slots_.erase(it);
}

std::vector<Match> CondorPool::NegotiateCycle(SimTime now) {
  std::vector<Slot> slots;
  for (const auto& [name, slot] : slots_) slots.push_back(slot);
  auto matches = Negotiate(IdleJobs(), slots, now);
  for (const auto& m : matches) {
    JobAd& job = jobs_.at(m.job_id);
    StartJob(job, slots_.at(m.pod_name), now);
    running_on_[m.job_id] = m.pod_name;
    finish_at_[m.job_id] = now + job.duration;
  }
  return matches;
}

std::vector<Match> CondorPool::CompleteDue(SimTime now) {
  std::vector<Match> done;
  for (const auto& [id, at] : finish_at_) {
    if (at <= now) done.push_back({id, running_on_.at(id)});
  }
  for (const auto& m : done) {
    CompleteJob(jobs_.at(m.job_id), slots_.at(m.pod_name), now);
    running_on_.erase(m.job_id);
    finish_at_.erase(m.job_id);
  }
  return done;
}

std::optional<JobId> CondorPool::PreemptSlot(const std::string& pod_name, SimTime now) {
  auto it = slots_.find(pod_name);
  if (it == slots_.end()) return std::nullopt;
  std::optional<JobId> victim = it->second.claimed_job;
  if (victim) {
    JobAd& job = jobs_.at(*victim);
    job.state = JobState::kIdle;
    ++job.restart_count;
    running_on_.erase(*victim);
    finish_at_.erase(*victim);
    it->second.last_claim_end = now;
  }
  slots_.erase(it);
  return victim;
}

void CondorPool::RemoveJob(JobId job_id, SimTime now) {
  JobAd& job = jobs_.at(job_id);
  if (job.state == JobState::kRunning) {
    Slot& slot = slots_.at(running_on_.at(job_id));
    slot.claimed_job.reset();
    slot.last_claim_end = now;
    running_on_.erase(job_id);
    finish_at_.erase(job_id);
  }
  job.state = JobState::kRemoved;
}

std::vector<std::string> CondorPool::SelfTerminationCandidates(SimTime idle_timeout_s,
                                                               SimTime now) const {
  auto idle = IdleJobs();
  std::vector<std::string> out;
  for (const auto& [name, slot] : slots_) {
    if (ShouldTerminate(slot, idle, idle_timeout_s, now)) out.push_back(name);
  }
  return out;
}

std::vector<JobAd> CondorPool::IdleJobs() const {
  std::vector<JobAd> out;
  for (const auto& [id, job] : jobs_) {
    if (job.state == JobState::kIdle) out.push_back(job);
  }
  return out;
}

std::vector<JobAd> CondorPool::AllJobs() const {
  std::vector<JobAd> out;
  out.reserve(jobs_.size());
  for (const auto& [id, job] : jobs_) out.push_back(job);
  return out;
}

std::optional<SimTime> CondorPool::NextCompletion() const {
  std::optional<SimTime> next;
  for (const auto& [id, at] : finish_at_) {
    if (!next || at < *next) next = at;
  }
  return next;
}

int64_t CondorPool::CountJobs(JobState state) const {
  return std::count_if(jobs_.begin(), jobs_.end(),
                       [&](const auto& entry) { return entry.second.state == state; });
}

}  // namespace kprov
