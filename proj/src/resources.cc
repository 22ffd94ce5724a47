#include "kprov/resources.h"

#include <cstdio>
#include <stdexcept>

#include "kprov/errors.h"

namespace kprov {

ResourceVector& ResourceVector::operator+=(const ResourceVector& other) {
  cpus_milli += other.cpus_milli;
  gpus += other.gpus;
  memory_mib += other.memory_mib;
  disk_mib += other.disk_mib;
  return *this;
}

ResourceVector& ResourceVector::operator-=(const ResourceVector& other) {
  cpus_milli -= other.cpus_milli;
  gpus -= other.gpus;
  memory_mib -= other.memory_mib;
  disk_mib -= other.disk_mib;
  return *this;
}

bool ResourceVector::IsNonNegative() const {
  return cpus_milli >= 0 && gpus >= 0 && memory_mib >= 0 && disk_mib >= 0;
}

std::string ResourceVector::ToString() const {
  return "{cpus_milli=" + std::to_string(cpus_milli) + ", gpus=" + std::to_string(gpus) +
         ", memory_mib=" + std::to_string(memory_mib) + ", disk_mib=" + std::to_string(disk_mib) +
         "}";
}

bool Fits(const ResourceVector& request, const ResourceVector& capacity) {
  return request.cpus_milli <= capacity.cpus_milli && request.gpus <= capacity.gpus &&
         request.memory_mib <= capacity.memory_mib && request.disk_mib <= capacity.disk_mib;
}

std::string GroupKey::ToString() const {
  return "c" + std::to_string(cpus_milli) + "-g" + std::to_string(gpus) + "-m" +
         std::to_string(memory_mib) + "-d" + std::to_string(disk_mib);
}

GroupKey GroupKey::Parse(const std::string& text) {
  GroupKey key;
  long long c = 0, g = 0, m = 0, d = 0;
  int consumed = 0;
  if (std::sscanf(text.c_str(), "c%lld-g%lld-m%lld-d%lld%n", &c, &g, &m, &d, &consumed) != 4 ||
      static_cast<size_t>(consumed) != text.size()) {
    throw InvalidValue("malformed group key '" + text + "'");
  }
  key.cpus_milli = c;
  key.gpus = g;
  key.memory_mib = m;
  key.disk_mib = d;
  return key;
}

namespace {

int64_t RoundUp(int64_t value, int64_t quantum) {
  if (value <= 0) return 0;
  return ((value + quantum - 1) / quantum) * quantum;
}

}  // namespace

GroupKey GroupKeyOf(const ResourceVector& request, int64_t mem_quantum_mib,
                    int64_t disk_quantum_mib) {
  if (mem_quantum_mib < 1 || disk_quantum_mib < 1) {
    throw std::invalid_argument("group quanta must be >= 1");
  }
  return GroupKey{request.cpus_milli, request.gpus, RoundUp(request.memory_mib, mem_quantum_mib),
                  RoundUp(request.disk_mib, disk_quantum_mib)};
}

}  // namespace kprov
