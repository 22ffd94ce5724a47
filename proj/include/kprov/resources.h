#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace kprov {

/// Quantified CPU/GPU/memory/disk amount. Used both for requests and for
/// capacities. CPU is in millicores so that whole batch cores (x1000) and
/// fractional orchestrator CPUs share one unit.
struct ResourceVector {
  int64_t cpus_milli = 0;
  int64_t gpus = 0;
  int64_t memory_mib = 0;
  int64_t disk_mib = 0;

  auto operator<=>(const ResourceVector&) const = default;

  ResourceVector& operator+=(const ResourceVector& other);
  ResourceVector& operator-=(const ResourceVector& other);

  bool IsZero() const { return *this == ResourceVector{}; }
  bool IsNonNegative() const;
  std::string ToString() const;
};

inline ResourceVector operator+(ResourceVector a, const ResourceVector& b) { return a += b; }
inline ResourceVector operator-(ResourceVector a, const ResourceVector& b) { return a -= b; }

/// True iff every field of `request` is <= the same field of `capacity`.
bool Fits(const ResourceVector& request, const ResourceVector& capacity);

/// Quantized resource class. Two jobs land in the same group iff their
/// quantized requests are field-wise equal. Ordering is lexicographic over
/// (cpus_milli, gpus, memory_mib, disk_mib).
struct GroupKey {
  int64_t cpus_milli = 0;
  int64_t gpus = 0;
  int64_t memory_mib = 0;
  int64_t disk_mib = 0;

  auto operator<=>(const GroupKey&) const = default;

  ResourceVector ToVector() const { return {cpus_milli, gpus, memory_mib, disk_mib}; }
  /// Compact stable form, e.g. "c1000-g1-m4096-d10240". Safe inside pod names.
  std::string ToString() const;
  /// Inverse of ToString; throws InvalidValue.
  static GroupKey Parse(const std::string& text);
};

/// CPUs and GPUs are copied exactly; memory and disk are rounded up to the
/// next multiple of their quantum. Quanta must be >= 1.
GroupKey GroupKeyOf(const ResourceVector& request, int64_t mem_quantum_mib,
                    int64_t disk_quantum_mib);

}  // namespace kprov
