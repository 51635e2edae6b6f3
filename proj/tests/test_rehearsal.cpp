#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "icda/rehearsal.hpp"

using namespace icda;

namespace {

Dataset make_class_data(std::size_t label, std::size_t n, std::uint64_t first_id) {
  Dataset d;
  for (std::size_t i = 0; i < n; ++i) {
    d.push_back(Sample{{static_cast<double>(label), static_cast<double>(i)}, label, 0, first_id + i});
  }
  return d;
}

std::vector<std::uint64_t> sorted_ids(std::vector<std::uint64_t> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

TEST_CASE("quota_for: fraction of the class, at least one") {
  CHECK(quota_for(0.25, 60) == 15);
  CHECK(quota_for(0.25, 10) == 3);
  CHECK(quota_for(0.01, 5) == 1);
  CHECK(quota_for(1.0, 7) == 7);
  CHECK_THROWS_AS(quota_for(0.0, 7), DomainError);
}

TEST_CASE("update_memory: quota caps buckets, big quota stores everything") {
  RehearsalMemory mem;
  mem.selection_seed = 3;
  const Dataset d = make_class_data(0, 8, 0);
  const std::size_t c0[] = {0};
  mem = update_memory(mem, d, c0, 100);
  CHECK(mem.buckets.at(0).exemplars.size() == 8);
  CHECK_THROWS_AS(update_memory(mem, d, c0, 0), DomainError);

  RehearsalMemory small;
  small.selection_seed = 3;
  small = update_memory(small, d, c0, 3);
  CHECK(small.buckets.at(0).exemplars.size() == 3);
  for (const auto& s : small.buckets.at(0).exemplars) CHECK(s.label == 0);
}

TEST_CASE("update_memory: grows monotonically and leaves existing buckets untouched") {
  RehearsalMemory mem;
  mem.selection_seed = 11;
  std::size_t prev = 0;
  std::size_t expected_total = 0;
  for (std::size_t c = 0; c < 6; ++c) {
    const std::size_t size = 10 + 5 * c;
    const Dataset d = make_class_data(c, size, 1000 * c);
    const auto before = mem.buckets;
    const std::size_t cls[] = {c};
    mem = update_memory(mem, d, cls, 12);
    for (const auto& [k, b] : before) CHECK(mem.buckets.at(k) == b);
    CHECK(mem.total() > prev);
    prev = mem.total();
    expected_total += std::min<std::size_t>(12, size);
    CHECK(mem.total() == expected_total);
    for (const auto& [k, b] : mem.buckets) CHECK(b.exemplars.size() <= b.quota);
  }
}

TEST_CASE("update_memory: deterministic, empty classes warn") {
  const Dataset d = make_class_data(4, 40, 0);
  const std::size_t cls[] = {4};
  RehearsalMemory a, b;
  a.selection_seed = b.selection_seed = 77;
  a = update_memory(a, d, cls, 10);
  b = update_memory(b, d, cls, 10);
  CHECK(a == b);
  RehearsalMemory c;
  c.selection_seed = 78;
  c = update_memory(c, d, cls, 10);
  CHECK_FALSE(a == c);

  const std::size_t missing[] = {9};
  RehearsalMemory e = update_memory(RehearsalMemory{}, d, missing, 5);
  CHECK(e.buckets.at(9).exemplars.empty());
  CHECK(e.warnings.size() == 1);
}

TEST_CASE("build_increment_batches: first increment has no old rows") {
  const Dataset d = make_class_data(0, 9, 0);
  const auto batches = build_increment_batches(d, RehearsalMemory{}, 4, 0, 1, 5);
  CHECK(batches.size() == 3);
  for (const auto& b : batches) {
    CHECK(b.lacks_old());
    CHECK_FALSE(b.lacks_new());
  }
}

TEST_CASE("build_increment_batches: 100 new + 50 exemplars in batches of 25") {
  RehearsalMemory mem;
  mem.selection_seed = 1;
  const Dataset old0 = make_class_data(0, 40, 0), old1 = make_class_data(1, 40, 100);
  const std::size_t c0[] = {0}, c1[] = {1};
  mem = update_memory(mem, old0, c0, 25);
  mem = update_memory(mem, old1, c1, 25);
  REQUIRE(mem.total() == 50);
  Dataset fresh = make_class_data(2, 50, 200);
  const Dataset fresh3 = make_class_data(3, 50, 300);
  fresh.insert(fresh.end(), fresh3.begin(), fresh3.end());

  const auto batches = build_increment_batches(fresh, mem, 25, 2, 2, 9);
  CHECK(batches.size() == 6);
  std::vector<std::uint64_t> seen, want;
  for (const auto& b : batches) {
    CHECK(b.features.rows() == 25);
    seen.insert(seen.end(), b.ids.begin(), b.ids.end());
    for (std::size_t r : b.partition.old_rows) CHECK(b.labels[r] < 2);
    for (std::size_t r : b.partition.new_rows) CHECK(b.labels[r] >= 2);
    CHECK(b.partition.old_rows.size() + b.partition.new_rows.size() == 25);
  }
  for (const auto& s : fresh) want.push_back(s.id);
  for (const auto& s : mem.all()) want.push_back(s.id);
  CHECK(sorted_ids(seen) == sorted_ids(want));

  const auto again = build_increment_batches(fresh, mem, 25, 2, 2, 9);
  for (std::size_t i = 0; i < batches.size(); ++i) CHECK(again[i].ids == batches[i].ids);
  const auto other = build_increment_batches(fresh, mem, 25, 2, 2, 10);
  CHECK_FALSE(other[0].ids == batches[0].ids);
}

TEST_CASE("build_increment_batches: preconditions") {
  const Dataset d = make_class_data(0, 4, 0);
  CHECK_THROWS_AS(build_increment_batches(d, RehearsalMemory{}, 1, 0, 1, 0), DomainError);
  CHECK_THROWS_AS(build_increment_batches(Dataset{}, RehearsalMemory{}, 4, 0, 1, 0), DomainError);
}
