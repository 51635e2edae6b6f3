#include "icda/rehearsal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "icda/errors.hpp"
#include "icda/seed.hpp"

namespace icda {

std::size_t RehearsalMemory::total() const {
  std::size_t n = 0;
  for (const auto& [c, b] : buckets) n += b.exemplars.size();
  return n;
}

std::vector<Sample> RehearsalMemory::all() const {
  std::vector<Sample> out;
  out.reserve(total());
  for (const auto& [c, b] : buckets) out.insert(out.end(), b.exemplars.begin(), b.exemplars.end());
  return out;
}

std::size_t quota_for(double fraction, std::size_t class_size) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw DomainError("quota fraction must lie in (0, 1]");
  const auto q = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(class_size)));
  return std::max<std::size_t>(q, 1);
}

RehearsalMemory update_memory(RehearsalMemory memory, const Dataset& new_class_data,
                              std::span<const std::size_t> class_ids, std::size_t quota) {
  if (quota < 1) throw DomainError("rehearsal quota must be >= 1");
  for (std::size_t c : class_ids) {
    if (memory.buckets.contains(c)) continue;
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < new_class_data.size(); ++i) {
      if (new_class_data[i].label == c) idx.push_back(i);
    }
    ExemplarBucket bucket;
    bucket.quota = quota;
    if (idx.empty()) {
      memory.warnings.push_back("class " + std::to_string(c) + " has no samples; bucket empty");
    }
    std::mt19937_64 rng(derive_seed(memory.selection_seed, "exemplars", c));
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(std::min(idx.size(), quota));
    for (std::size_t i : idx) bucket.exemplars.push_back(new_class_data[i]);
    memory.buckets.emplace(c, std::move(bucket));
  }
  return memory;
}

std::vector<TrainingBatch> build_increment_batches(const Dataset& new_data,
                                                   const RehearsalMemory& memory,
                                                   std::size_t batch_size, std::size_t c_old,
                                                   std::size_t c_new,
                                                   std::uint64_t shuffle_seed) {
  if (batch_size < 2) throw DomainError("batch size must be >= 2");
  if (new_data.empty()) throw DomainError("increment has no new-class samples");
  std::vector<const Sample*> pool;
  pool.reserve(new_data.size() + memory.total());
  for (const auto& s : new_data) pool.push_back(&s);
  for (const auto& [c, b] : memory.buckets) {
    for (const auto& s : b.exemplars) pool.push_back(&s);
  }
  std::mt19937_64 rng(shuffle_seed);
  std::shuffle(pool.begin(), pool.end(), rng);

  const std::size_t dims = new_data.front().features.size();
  std::vector<TrainingBatch> batches;
  for (std::size_t start = 0; start < pool.size(); start += batch_size) {
    const std::size_t n = std::min(batch_size, pool.size() - start);
    TrainingBatch b;
    b.features = Matrix(n, dims);
    for (std::size_t r = 0; r < n; ++r) {
      const Sample& s = *pool[start + r];
      if (s.features.size() != dims) throw ShapeError("rehearsal sample dimension mismatch");
      std::copy(s.features.begin(), s.features.end(), b.features.row(r).begin());
      b.labels.push_back(s.label);
      b.ids.push_back(s.id);
    }
    b.partition = partition_batch(b.labels, c_old, c_new);
    batches.push_back(std::move(b));
  }
  return batches;
}

}  // namespace icda
