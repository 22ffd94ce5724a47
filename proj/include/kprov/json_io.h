#pragma once

#include <initializer_list>
#include <string>

#include "json.hpp"
#include "kprov/model.h"

namespace kprov {

using Json = nlohmann::ordered_json;

/// Typed field access with SchemaError paths such as "workload[3].request.gpus".
class JsonReader {
 public:
  JsonReader(const Json& value, std::string path) : value_(value), path_(std::move(path)) {}

  const Json& value() const { return value_; }
  const std::string& path() const { return path_; }

  bool Has(const std::string& key) const;
  JsonReader Field(const std::string& key) const;
  JsonReader Index(size_t i) const;
  size_t Size() const;

  /// Rejects keys outside `allowed`.
  void ExpectObject(std::initializer_list<const char*> allowed) const;
  void ExpectArray() const;

  int64_t Int() const;
  int64_t NonNegativeInt() const;
  bool Bool() const;
  std::string String() const;

  int64_t IntOr(const std::string& key, int64_t fallback) const;
  bool BoolOr(const std::string& key, bool fallback) const;
  std::string StringOr(const std::string& key, const std::string& fallback) const;

  [[noreturn]] void Fail(const std::string& message) const;

 private:
  const Json& value_;
  std::string path_;
};

Json ToJson(const ResourceVector& r);
Json ToJson(const Attributes& attrs);
ResourceVector ResourcesFromJson(const JsonReader& in);
Attributes AttributesFromJson(const JsonReader& in);

/// {"job_id", "state"?, "request", "attributes"?, "requirements"?,
///  "submit_time"?, "duration"?, "restart_count"?}
JobAd JobFromJson(const JsonReader& in);
Json ToJson(const JobAd& job);

/// {"pod_name", "phase", "request", "group"?, "priority"?, "owner_label"?,
///  "created_time"?, "terminated_time"?, "bound_node"?}. A missing group is
/// derived from the request with the given quanta; a missing owner_label
/// means provisioner-owned.
PodState PodFromJson(const JsonReader& in, int64_t mem_quantum_mib, int64_t disk_quantum_mib);
Json ToJson(const PodState& pod);

}  // namespace kprov
