#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>

#include "icda/data.hpp"
#include "icda/errors.hpp"

using namespace icda;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name, const std::string& content) {
  const fs::path dir = fs::temp_directory_path() / "icda_test_data";
  fs::create_directories(dir);
  const fs::path p = dir / name;
  std::ofstream(p, std::ios::binary) << content;
  return p;
}

}  // namespace

TEST_CASE("default synthetic stream mirrors the two-stage shape") {
  const TaskStream s = generate_synthetic_stream(SyntheticSpec{}, 7);
  CHECK(s.increments.size() == 11);
  CHECK(s.stage_boundary == 6);
  CHECK(s.total_classes() == 12);
  CHECK(s.increments[0].new_class_ids == std::vector<std::size_t>{0, 1});
  std::size_t next = 0;
  for (std::size_t i = 0; i < s.increments.size(); ++i) {
    const auto& inc = s.increments[i];
    CHECK(inc.domain == (i < 6 ? 0 : 1));
    for (std::size_t c : inc.new_class_ids) CHECK(c == next++);
    for (const auto& smp : inc.train) CHECK(smp.domain == inc.domain);
  }
  // Domains sit on opposite sides of the first axis.
  double mean_a = 0.0, mean_b = 0.0;
  std::size_t na = 0, nb = 0;
  for (const auto& inc : s.increments) {
    for (const auto& smp : inc.train) {
      (inc.domain == 0 ? mean_a : mean_b) += smp.features[0];
      ++(inc.domain == 0 ? na : nb);
    }
  }
  CHECK(mean_a / static_cast<double>(na) > 0.0);
  CHECK(mean_b / static_cast<double>(nb) < 0.0);
}

TEST_CASE("synthetic stream is deterministic per seed") {
  const auto a = generate_synthetic_stream(SyntheticSpec{}, 3);
  const auto b = generate_synthetic_stream(SyntheticSpec{}, 3);
  const auto c = generate_synthetic_stream(SyntheticSpec{}, 4);
  REQUIRE(a.increments.size() == b.increments.size());
  for (std::size_t i = 0; i < a.increments.size(); ++i) {
    CHECK(a.increments[i].train == b.increments[i].train);
    CHECK(a.increments[i].test == b.increments[i].test);
  }
  CHECK_FALSE(a.increments[0].train == c.increments[0].train);
}

TEST_CASE("zero spread is separable by the nearest class centroid") {
  SyntheticSpec spec;
  spec.cluster_spread = 0.0;
  const auto s = generate_synthetic_stream(spec, 5);
  std::map<std::size_t, std::vector<double>> centroid;
  for (const auto& inc : s.increments) {
    for (const auto& smp : inc.train) centroid[smp.label] = smp.features;
  }
  std::size_t correct = 0, total = 0;
  for (const auto& inc : s.increments) {
    for (const auto& smp : inc.test) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (const auto& [label, mu] : centroid) {
        double d = 0.0;
        for (std::size_t k = 0; k < mu.size(); ++k) d += (mu[k] - smp.features[k]) * (mu[k] - smp.features[k]);
        if (d < best_d) {
          best_d = d;
          best = label;
        }
      }
      correct += best == smp.label ? 1 : 0;
      ++total;
    }
  }
  CHECK(correct == total);
}

TEST_CASE("degenerate synthetic specs are rejected") {
  SyntheticSpec s;
  s.dims = 1;
  CHECK_THROWS_AS(generate_synthetic_stream(s, 1), DomainError);
  SyntheticSpec t;
  t.classes_per_domain = {1, 5};
  CHECK_THROWS_AS(generate_synthetic_stream(t, 1), DomainError);
  SyntheticSpec u;
  u.increments_per_domain = {8, 5};
  CHECK_THROWS_AS(generate_synthetic_stream(u, 1), DomainError);
}

TEST_CASE("csv: loads valid rows") {
  const auto p = temp_file("ok.csv", "domain,label,f0,f1\n0,1,0.5,-2\n1,0,3,4e-3\n0,2,1.25,7\n");
  const Dataset d = load_csv_dataset(p);
  REQUIRE(d.size() == 3);
  CHECK(d[0].label == 1);
  CHECK(d[1].domain == 1);
  CHECK(d[1].features[1] == 4e-3);
  CHECK(d[2].features[0] == 1.25);
}

TEST_CASE("csv: ragged and non-numeric rows name the line") {
  const auto ragged = temp_file("ragged.csv", "domain,label,f0,f1\n0,1,0.5,-2\n0,1,0.5\n");
  try {
    load_csv_dataset(ragged);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find(":3:") != std::string::npos);
  }
  const auto text = temp_file("text.csv", "domain,label,f0\n0,1,abc\n");
  try {
    load_csv_dataset(text);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }
  CHECK_THROWS_AS(load_csv_dataset(temp_file("hdr.csv", "label,domain,f0\n")), ParseError);
  CHECK_THROWS_AS(load_csv_dataset("/nonexistent/icda.csv"), ParseError);
}

TEST_CASE("csv: export then load round-trips exactly") {
  const auto s = generate_synthetic_stream(SyntheticSpec{}, 9);
  Dataset d = s.increments[0].train;
  const fs::path p = fs::temp_directory_path() / "icda_test_data" / "roundtrip.csv";
  fs::create_directories(p.parent_path());
  write_csv_dataset(p, d);
  const Dataset back = load_csv_dataset(p);
  REQUIRE(back.size() == d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(back[i].features == d[i].features);
    CHECK(back[i].label == d[i].label);
    CHECK(back[i].domain == d[i].domain);
  }
}

TEST_CASE("split: stratified, exhaustive, deterministic") {
  Dataset d;
  for (std::size_t c = 0; c < 3; ++c) {
    for (std::size_t i = 0; i < 10; ++i) d.push_back(Sample{{double(c), double(i)}, c, 0, c * 10 + i});
  }
  const auto sp = split(d, 0.5, 4);
  std::map<std::size_t, std::size_t> tr, te;
  for (const auto& s : sp.train) ++tr[s.label];
  for (const auto& s : sp.test) ++te[s.label];
  for (std::size_t c = 0; c < 3; ++c) {
    CHECK(tr[c] == 5);
    CHECK(te[c] == 5);
  }
  std::vector<std::uint64_t> ids;
  for (const auto& s : sp.train) ids.push_back(s.id);
  for (const auto& s : sp.test) ids.push_back(s.id);
  std::sort(ids.begin(), ids.end());
  for (std::size_t i = 0; i < ids.size(); ++i) CHECK(ids[i] == i);

  const auto again = split(d, 0.5, 4);
  CHECK(again.train == sp.train);
  CHECK_FALSE(split(d, 0.5, 5).train == sp.train);
  CHECK_THROWS_AS(split(d, 0.0, 1), DomainError);
  CHECK_THROWS_AS(split(d, 1.0, 1), DomainError);

  const auto odd = split(d, 0.33, 1);
  std::map<std::size_t, std::size_t> cnt;
  for (const auto& s : odd.train) ++cnt[s.label];
  for (const auto& [c, n] : cnt) CHECK(std::abs(double(n) - 3.3) <= 1.0);
}
