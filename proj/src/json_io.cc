#include "kprov/json_io.h"

#include <algorithm>
#include <cstring>

#include "kprov/errors.h"

namespace kprov {

bool JsonReader::Has(const std::string& key) const {
  return value_.is_object() && value_.contains(key);
}

JsonReader JsonReader::Field(const std::string& key) const {
  if (!value_.is_object()) Fail("expected an object");
  auto it = value_.find(key);
  if (it == value_.end()) {
    throw SchemaError(path_.empty() ? key : path_ + "." + key, "missing required field");
  }
  return JsonReader(*it, path_.empty() ? key : path_ + "." + key);
}

JsonReader JsonReader::Index(size_t i) const {
  return JsonReader(value_.at(i), path_ + "[" + std::to_string(i) + "]");
}

size_t JsonReader::Size() const {
  ExpectArray();
  return value_.size();
}

void JsonReader::ExpectObject(std::initializer_list<const char*> allowed) const {
  if (!value_.is_object()) Fail("expected an object");
  for (const auto& [key, v] : value_.items()) {
    bool known = std::any_of(allowed.begin(), allowed.end(),
                             [&](const char* a) { return key == a; });
    if (!known) {
      throw SchemaError(path_.empty() ? key : path_ + "." + key, "unknown field");
    }
  }
}

void JsonReader::ExpectArray() const {
  if (!value_.is_array()) Fail("expected an array");
}

int64_t JsonReader::Int() const {
  if (!value_.is_number_integer()) Fail("expected an integer");
  return value_.get<int64_t>();
}

int64_t JsonReader::NonNegativeInt() const {
  int64_t v = Int();
  if (v < 0) Fail("must be >= 0");
  return v;
}

bool JsonReader::Bool() const {
  if (!value_.is_boolean()) Fail("expected a boolean");
  return value_.get<bool>();
}

std::string JsonReader::String() const {
  if (!value_.is_string()) Fail("expected a string");
  return value_.get<std::string>();
}

int64_t JsonReader::IntOr(const std::string& key, int64_t fallback) const {
  return Has(key) ? Field(key).Int() : fallback;
}

bool JsonReader::BoolOr(const std::string& key, bool fallback) const {
  return Has(key) ? Field(key).Bool() : fallback;
}

std::string JsonReader::StringOr(const std::string& key, const std::string& fallback) const {
  return Has(key) ? Field(key).String() : fallback;
}

void JsonReader::Fail(const std::string& message) const {
  throw SchemaError(path_.empty() ? "<root>" : path_, message);
}

Json ToJson(const ResourceVector& r) {
  return Json{{"cpus_milli", r.cpus_milli},
              {"gpus", r.gpus},
              {"memory_mib", r.memory_mib},
              {"disk_mib", r.disk_mib}};
}

Json ToJson(const Attributes& attrs) {
  Json out = Json::object();
  for (const auto& [k, v] : attrs) out[k] = v;
  return out;
}

ResourceVector ResourcesFromJson(const JsonReader& in) {
  in.ExpectObject({"cpus_milli", "gpus", "memory_mib", "disk_mib"});
  ResourceVector r;
  auto get = [&](const char* key) { return in.Has(key) ? in.Field(key).NonNegativeInt() : 0; };
  r.cpus_milli = get("cpus_milli");
  r.gpus = get("gpus");
  r.memory_mib = get("memory_mib");
  r.disk_mib = get("disk_mib");
  return r;
}

Attributes AttributesFromJson(const JsonReader& in) {
  if (!in.value().is_object()) in.Fail("expected an object of strings");
  Attributes attrs;
  for (const auto& [key, v] : in.value().items()) {
    attrs[key] = in.Field(key).String();
  }
  return attrs;
}

JobAd JobFromJson(const JsonReader& in) {
  in.ExpectObject({"job_id", "state", "request", "attributes", "requirements", "submit_time",
                   "duration", "restart_count"});
  JobAd job;
  job.job_id = in.Field("job_id").Int();
  try {
    job.state = ParseJobState(in.StringOr("state", "Idle"));
  } catch (const InvalidValue& e) {
    in.Field("state").Fail(e.what());
  }
  job.request = ResourcesFromJson(in.Field("request"));
  if (in.Has("attributes")) job.attributes = AttributesFromJson(in.Field("attributes"));
  if (in.Has("requirements")) {
    try {
      job.requirements = ParseFilter(in.Field("requirements").String());
    } catch (const FilterSyntax& e) {
      in.Field("requirements").Fail(e.what());
    }
  }
  job.submit_time = in.IntOr("submit_time", 0);
  job.duration = in.IntOr("duration", 0);
  job.restart_count = in.IntOr("restart_count", 0);
  return job;
}

Json ToJson(const JobAd& job) {
  return Json{{"job_id", job.job_id},
              {"state", ToString(job.state)},
              {"request", ToJson(job.request)},
              {"attributes", ToJson(job.attributes)},
              {"requirements", FormatFilter(job.requirements)},
              {"submit_time", job.submit_time},
              {"duration", job.duration},
              {"restart_count", job.restart_count}};
}

PodState PodFromJson(const JsonReader& in, int64_t mem_quantum_mib, int64_t disk_quantum_mib) {
  in.ExpectObject({"pod_name", "phase", "request", "group", "priority", "owner_label",
                   "created_time", "terminated_time", "bound_node"});
  PodState pod;
  pod.spec.pod_name = in.Field("pod_name").String();
  try {
    pod.phase = ParsePodPhase(in.Field("phase").String());
  } catch (const InvalidValue& e) {
    in.Field("phase").Fail(e.what());
  }
  pod.spec.request = ResourcesFromJson(in.Field("request"));
  if (in.Has("group")) {
    try {
      pod.spec.group = GroupKey::Parse(in.Field("group").String());
    } catch (const InvalidValue& e) {
      in.Field("group").Fail(e.what());
    }
  } else {
    pod.spec.group = GroupKeyOf(pod.spec.request, mem_quantum_mib, disk_quantum_mib);
  }
  pod.spec.priority = in.IntOr("priority", 0);
  pod.spec.owner_label = in.StringOr("owner_label", kOwnerLabel);
  pod.created_time = in.IntOr("created_time", 0);
  pod.terminated_time = in.IntOr("terminated_time", 0);
  if (in.Has("bound_node")) pod.bound_node = in.Field("bound_node").String();
  return pod;
}

Json ToJson(const PodState& pod) {
  Json out{{"pod_name", pod.spec.pod_name},
           {"phase", ToString(pod.phase)},
           {"request", ToJson(pod.spec.request)},
           {"group", pod.spec.group.ToString()},
           {"priority", pod.spec.priority},
           {"owner_label", pod.spec.owner_label},
           {"created_time", pod.created_time},
           {"terminated_time", pod.terminated_time}};
  if (pod.bound_node) out["bound_node"] = *pod.bound_node;
  return out;
}

}  // namespace kprov
