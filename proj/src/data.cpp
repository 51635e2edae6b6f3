#include "icda/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "icda/errors.hpp"
#include "icda/seed.hpp"

namespace icda {

std::size_t TaskStream::total_classes() const {
  std::size_t n = 0;
  for (const auto& inc : increments) n += inc.new_class_ids.size();
  return n;
}

std::size_t TaskStream::feature_dim() const {
  for (const auto& inc : increments) {
    if (!inc.train.empty()) return inc.train.front().features.size();
  }
  return 0;
}

void TaskStream::validate() const {
  if (increments.empty()) throw DomainError("task stream has no increments");
  if (stage_boundary > increments.size()) throw DomainError("stage boundary past stream end");
  const std::size_t dim = feature_dim();
  std::size_t next = 0;
  for (std::size_t i = 0; i < increments.size(); ++i) {
    const auto& inc = increments[i];
    if (inc.new_class_ids.empty()) {
      throw DomainError("increment " + std::to_string(i + 1) + " adds no classes");
    }
    for (std::size_t c : inc.new_class_ids) {
      if (c != next) {
        throw DomainError("increment " + std::to_string(i + 1) + ": class id " +
                          std::to_string(c) + " breaks the 0..N-1 enumeration (expected " +
                          std::to_string(next) + ")");
      }
      ++next;
    }
    if (inc.train.empty()) {
      throw DomainError("increment " + std::to_string(i + 1) + " has no training samples");
    }
    const std::size_t lo = inc.new_class_ids.front();
    for (const Dataset* set : {&inc.train, &inc.test}) {
      for (const auto& s : *set) {
        if (s.label < lo || s.label >= next) {
          throw DomainError("increment " + std::to_string(i + 1) + ": sample label " +
                            std::to_string(s.label) + " is not one of its new classes");
        }
        if (s.features.size() != dim) {
          throw DomainError("increment " + std::to_string(i + 1) + ": feature dim " +
                            std::to_string(s.features.size()) + " != " + std::to_string(dim));
        }
      }
    }
  }
}

void SyntheticSpec::validate() const {
  if (dims < 2) throw DomainError("synthetic stream needs dims >= 2");
  if (classes_per_domain.empty() || classes_per_domain.size() > 2) {
    throw DomainError("synthetic stream supports one or two domains");
  }
  if (increments_per_domain.size() != classes_per_domain.size()) {
    throw DomainError("increments_per_domain must list one entry per domain");
  }
  for (std::size_t d = 0; d < classes_per_domain.size(); ++d) {
    if (classes_per_domain[d] < 2) throw DomainError("each domain needs at least 2 classes");
    if (increments_per_domain[d] < 1 || increments_per_domain[d] > classes_per_domain[d]) {
      throw DomainError("increments per domain must lie in [1, classes]");
    }
  }
  if (!(cluster_spread >= 0.0) || !std::isfinite(cluster_spread)) {
    throw DomainError("cluster_spread must be finite and >= 0");
  }
  if (train_per_class < 1) throw DomainError("train_per_class must be >= 1");
}

namespace {

std::vector<double> random_direction(std::size_t dims, std::mt19937_64& rng) {
  // Unit vector orthogonal to the first (domain) axis.
  std::normal_distribution<double> n01(0.0, 1.0);
  std::vector<double> v(dims, 0.0);
  double norm = 0.0;
  while (norm < 1e-9) {
    norm = 0.0;
    for (std::size_t k = 1; k < dims; ++k) {
      v[k] = n01(rng);
      norm += v[k] * v[k];
    }
  }
  norm = std::sqrt(norm);
  for (double& x : v) x /= norm;
  return v;
}

}  // namespace

TaskStream generate_synthetic_stream(const SyntheticSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 geo(derive_seed(seed, "stream.geometry"));
  std::mt19937_64 draw(derive_seed(seed, "stream.samples"));
  std::normal_distribution<double> n01(0.0, 1.0);

  TaskStream stream;
  std::size_t next_class = 0;
  std::uint64_t next_id = 0;
  for (std::size_t d = 0; d < spec.classes_per_domain.size(); ++d) {
    if (d == 1) stream.stage_boundary = stream.increments.size();
    const double sign = d == 0 ? 1.0 : -1.0;
    const std::size_t n_classes = spec.classes_per_domain[d];
    std::vector<std::vector<double>> means;
    std::vector<double> pair_dir;
    for (std::size_t c = 0; c < n_classes; ++c) {
      if (c % 2 == 0) pair_dir = random_direction(spec.dims, geo);
      const auto sib = random_direction(spec.dims, geo);
      std::vector<double> mu(spec.dims, 0.0);
      mu[0] = sign * spec.domain_shift;
      for (std::size_t k = 1; k < spec.dims; ++k) {
        mu[k] = spec.pair_radius * pair_dir[k] + spec.sibling_radius * sib[k];
      }
      means.push_back(std::move(mu));
    }

    const std::size_t n_inc = spec.increments_per_domain[d];
    const std::size_t first = n_classes - (n_inc - 1);
    std::size_t c_local = 0;
    for (std::size_t i = 0; i < n_inc; ++i) {
      IncrementSpec inc;
      inc.domain = static_cast<int>(d);
      const std::size_t count = i == 0 ? first : 1;
      for (std::size_t k = 0; k < count; ++k, ++c_local) {
        const std::size_t label = next_class++;
        inc.new_class_ids.push_back(label);
        auto emit = [&](Dataset& out, std::size_t n) {
          for (std::size_t s = 0; s < n; ++s) {
            Sample smp;
            smp.label = label;
            smp.domain = inc.domain;
            smp.id = next_id++;
            smp.features.resize(spec.dims);
            for (std::size_t f = 0; f < spec.dims; ++f) {
              smp.features[f] = means[c_local][f] + spec.cluster_spread * n01(draw);
            }
            out.push_back(std::move(smp));
          }
        };
        emit(inc.train, spec.train_per_class);
        emit(inc.test, spec.test_per_class);
      }
      stream.increments.push_back(std::move(inc));
    }
  }
  if (spec.classes_per_domain.size() == 1) stream.stage_boundary = stream.increments.size();
  stream.validate();
  return stream;
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

template <typename T>
T parse_number(std::string_view field, const std::filesystem::path& path, std::size_t line_no,
               const char* what) {
  field = trim(field);
  T value{};
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end || field.empty()) {
    throw ParseError(path.string() + ":" + std::to_string(line_no) + ": invalid " + what + " '" +
                     std::string(field) + "'");
  }
  return value;
}

}  // namespace

Dataset load_csv_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open dataset '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line)) throw ParseError(path.string() + ":1: missing header");
  const auto header = split_fields(trim(line));
  if (header.size() < 3 || trim(header[0]) != "domain" || trim(header[1]) != "label") {
    throw ParseError(path.string() + ":1: header must be domain,label,f0,...");
  }
  const std::size_t dims = header.size() - 2;
  for (std::size_t k = 0; k < dims; ++k) {
    if (trim(header[k + 2]) != "f" + std::to_string(k)) {
      throw ParseError(path.string() + ":1: expected column f" + std::to_string(k));
    }
  }
  Dataset out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(trim(line));
    if (fields.size() != dims + 2) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(dims) + " features, found " +
                       std::to_string(fields.size() < 2 ? 0 : fields.size() - 2));
    }
    Sample s;
    s.domain = parse_number<int>(fields[0], path, line_no, "domain");
    s.label = parse_number<std::size_t>(fields[1], path, line_no, "label");
    s.id = out.size();
    s.features.reserve(dims);
    for (std::size_t k = 0; k < dims; ++k) {
      const double v = parse_number<double>(fields[k + 2], path, line_no, "feature");
      if (!std::isfinite(v)) {
        throw ParseError(path.string() + ":" + std::to_string(line_no) + ": non-finite feature");
      }
      s.features.push_back(v);
    }
    out.push_back(std::move(s));
  }
  return out;
}

void write_csv_dataset(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write dataset '" + path.string() + "'");
  const std::size_t dims = data.empty() ? 0 : data.front().features.size();
  out << "domain,label";
  for (std::size_t k = 0; k < dims; ++k) out << ",f" << k;
  out << '\n';
  char buf[64];
  for (const auto& s : data) {
    out << s.domain << ',' << s.label;
    for (double v : s.features) {
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
      out << ',' << std::string_view(buf, ptr - buf);
    }
    out << '\n';
  }
}

Split split(const Dataset& data, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw DomainError("train fraction must lie in (0, 1)");
  }
  std::map<std::size_t, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < data.size(); ++i) by_class[data[i].label].push_back(i);
  Split out;
  for (auto& [label, idx] : by_class) {
    std::mt19937_64 rng(derive_seed(seed, "split", label));
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto n_train = static_cast<std::size_t>(
        std::floor(train_fraction * static_cast<double>(idx.size()) + 0.5));
    for (std::size_t k = 0; k < idx.size(); ++k) {
      (k < n_train ? out.train : out.test).push_back(data[idx[k]]);
    }
  }
  return out;
}

Matrix features_matrix(const Dataset& data) {
  const std::size_t dims = data.empty() ? 0 : data.front().features.size();
  Matrix m(data.size(), dims);
  for (std::size_t r = 0; r < data.size(); ++r) {
    if (data[r].features.size() != dims) throw ShapeError("ragged feature vectors");
    std::copy(data[r].features.begin(), data[r].features.end(), m.row(r).begin());
  }
  return m;
}

}  // namespace icda
