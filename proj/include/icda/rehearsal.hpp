#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "icda/data.hpp"
#include "icda/losses.hpp"
#include "icda/matrix.hpp"

namespace icda {

// Exemplars of one class plus the quota they were selected under.
struct ExemplarBucket {
  std::size_t quota = 0;
  std::vector<Sample> exemplars;

  friend bool operator==(const ExemplarBucket&, const ExemplarBucket&) = default;
};

// Previous-training subset replayed into later increments.
struct RehearsalMemory {
  std::map<std::size_t, ExemplarBucket> buckets;
  std::uint64_t selection_seed = 0;
  std::vector<std::string> warnings;

  std::size_t total() const;
  bool empty() const { return total() == 0; }
  std::vector<Sample> all() const;  // ascending class id, then selection order

  friend bool operator==(const RehearsalMemory&, const RehearsalMemory&) = default;
};

// Per-class quota for a fraction of a class's training set (at least 1).
std::size_t quota_for(double fraction, std::size_t class_size);

// Stores up to `quota` uniformly drawn exemplars for every class listed in
// `class_ids`. Buckets of classes already in memory are left untouched; a
// listed class without samples gets an empty bucket and a warning.
RehearsalMemory update_memory(RehearsalMemory memory, const Dataset& new_class_data,
                              std::span<const std::size_t> class_ids, std::size_t quota);

struct TrainingBatch {
  Matrix features;
  std::vector<std::size_t> labels;
  std::vector<std::uint64_t> ids;
  BatchPartition partition;

  bool lacks_old() const { return partition.old_rows.empty(); }
  bool lacks_new() const { return partition.new_rows.empty(); }
};

// One epoch: all new samples plus all stored exemplars, shuffled with
// `shuffle_seed` and cut into batches of `batch_size` (the last may be
// shorter). Classes below `c_old` form the old side of each partition.
std::vector<TrainingBatch> build_increment_batches(const Dataset& new_data,
                                                   const RehearsalMemory& memory,
                                                   std::size_t batch_size, std::size_t c_old,
                                                   std::size_t c_new, std::uint64_t shuffle_seed);

}  // namespace icda
