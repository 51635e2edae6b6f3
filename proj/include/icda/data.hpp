#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "icda/matrix.hpp"

namespace icda {

struct Sample {
  std::vector<double> features;
  std::size_t label = 0;
  int domain = 0;
  // Stable identifier used for exemplar audits (position in the source set).
  std::uint64_t id = 0;

  friend bool operator==(const Sample&, const Sample&) = default;
};

using Dataset = std::vector<Sample>;

struct IncrementSpec {
  std::vector<std::size_t> new_class_ids;
  int domain = 0;
  Dataset train;
  Dataset test;
};

struct TaskStream {
  std::vector<IncrementSpec> increments;
  // Index of the first increment of the second domain (== size when the
  // stream has a single domain).
  std::size_t stage_boundary = 0;

  std::size_t total_classes() const;
  std::size_t feature_dim() const;
  // Throws DomainError unless class ids are gap-free 0..N-1 in increment
  // order, labels belong to their increment and dimensions agree.
  void validate() const;
};

struct SyntheticSpec {
  // Classes and increments per domain; the first increment of a domain
  // takes the surplus classes, later ones add one class each.
  std::vector<std::size_t> classes_per_domain{7, 5};
  std::vector<std::size_t> increments_per_domain{6, 5};
  std::size_t dims = 16;
  double cluster_spread = 1.0;
  std::size_t train_per_class = 60;
  std::size_t test_per_class = 40;
  // Geometry: domains sit at +-domain_shift along the first axis; classes
  // come in related pairs sharing a pair_radius offset, siblings differ by
  // sibling_radius.
  double domain_shift = 4.0;
  double pair_radius = 4.0;
  double sibling_radius = 2.5;

  void validate() const;
};

TaskStream generate_synthetic_stream(const SyntheticSpec& spec, std::uint64_t seed);

// CSV with header `domain,label,f0,...,f{d-1}`.
Dataset load_csv_dataset(const std::filesystem::path& path);
void write_csv_dataset(const std::filesystem::path& path, const Dataset& data);

struct Split {
  Dataset train;
  Dataset test;
};

// Stratified by label: each class contributes round(fraction * n_c) samples
// to train, the rest to test.
Split split(const Dataset& data, double train_fraction, std::uint64_t seed);

Matrix features_matrix(const Dataset& data);

}  // namespace icda
