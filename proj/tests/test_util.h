#pragma once

#include <string>
#include <vector>

#include "kprov/model.h"

namespace kprov::testing {

inline ResourceVector Res(int64_t cpus_milli, int64_t gpus, int64_t memory_mib = 0,
                          int64_t disk_mib = 0) {
  return {cpus_milli, gpus, memory_mib, disk_mib};
}

inline ResourceVector Gpus(int64_t n) { return Res(1000 * n, n, 4096 * n, 10240 * n); }

inline JobAd IdleJob(JobId id, ResourceVector request, SimTime submit_time = 0,
                     Attributes attributes = {}) {
  JobAd job;
  job.job_id = id;
  job.request = request;
  job.submit_time = submit_time;
  job.attributes = std::move(attributes);
  job.duration = 100;
  return job;
}

inline PodSpec SimplePod(std::string name, ResourceVector request, int64_t priority = 0) {
  PodSpec spec;
  spec.pod_name = std::move(name);
  spec.request = request;
  spec.group = GroupKeyOf(request, 1, 1);
  spec.priority = priority;
  return spec;
}

inline PodState OwnedPod(std::string name, const GroupKey& group, PodPhase phase) {
  PodState pod;
  pod.spec.pod_name = std::move(name);
  pod.spec.group = group;
  pod.spec.request = group.ToVector();
  pod.spec.owner_label = kOwnerLabel;
  pod.phase = phase;
  return pod;
}

inline NodeShape Shape(std::string name, ResourceVector capacity, SimTime boot_delay = 0) {
  NodeShape shape;
  shape.name = std::move(name);
  shape.capacity = capacity;
  shape.boot_delay = boot_delay;
  return shape;
}

inline Node ReadyNode(std::string id, ResourceVector capacity, Attributes labels = {},
                      std::vector<std::string> taints = {}) {
  Node node;
  node.node_id = id;
  node.shape = id;
  node.capacity = capacity;
  node.labels = std::move(labels);
  node.taints = std::move(taints);
  return node;
}

}  // namespace kprov::testing
