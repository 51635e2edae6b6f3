#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "icda/config.hpp"
#include "icda/errors.hpp"
#include "icda/gradcheck.hpp"
#include "icda/serialize.hpp"
#include "icda/trainer.hpp"

namespace icda::cli {

namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << content;
}

// Trains on the configured stream and writes the run artifacts into `dir`.
ScheduleResult execute(const RunConfig& cfg, const fs::path& dir) {
  const TaskStream stream = build_stream(cfg);
  ScheduleResult res = run_schedule(stream, cfg.train);
  fs::create_directories(dir);
  if (cfg.wants("json")) {
    write_file(dir / "history.json", history_to_json(res.history).dump(2) + "\n");
    write_file(dir / "manifest.json",
               manifest_to_json(res.history.manifest, res.history.config).dump(2) + "\n");
    write_file(dir / "model.json", model_to_json(res.model).dump() + "\n");
  }
  if (cfg.wants("csv")) {
    write_file(dir / "curves.csv", curves_csv(res.history));
    if (!res.history.increments.empty()) {
      write_file(dir / "confusion.csv", res.history.increments.back().report.confusion.to_csv());
    }
  }
  return res;
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ParseError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ShapeError& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace

int cmd_run(const fs::path& config_path, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = load_run_config(config_path);
    const fs::path dir = resolve_output_dir(cfg);
    const ScheduleResult res = execute(cfg, dir);
    const auto& last = res.history.increments.back();
    out << "run " << res.history.manifest.tag << ": " << res.history.increments.size()
        << " increments, " << last.classes_seen << " classes, accuracy "
        << format_double(last.report.accuracy) << ", f1 " << format_double(last.report.f1)
        << "\nartifacts in " << dir.string() << '\n';
    return kExitOk;
  });
}

int cmd_tau_sweep(const fs::path& config_path, const std::vector<double>& taus, std::ostream& out,
                  std::ostream& err) {
  return guarded(err, [&] {
    if (taus.empty()) throw ConfigError("tau list is empty");
    for (double t : taus) {
      if (!(t > 0.0) || !std::isfinite(t)) throw ConfigError("every tau must be > 0");
    }
    const RunConfig base = load_run_config(config_path);
    const fs::path dir = resolve_output_dir(base);
    std::vector<double> errors;
    for (double t : taus) {
      RunConfig cfg = base;
      cfg.train.weights.tau = t;
      const ScheduleResult res = execute(cfg, dir / ("tau-" + format_double(t)));
      errors.push_back(1.0 - res.history.increments.back().report.accuracy);
      out << "tau " << format_double(t) << ": top-1 error " << format_double(errors.back())
          << '\n';
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < errors.size(); ++i) {
      if (errors[i] < errors[best]) best = i;
    }
    std::ostringstream csv;
    csv << "tau,top1_error,argmin,in_operating_range\n";
    for (std::size_t i = 0; i < taus.size(); ++i) {
      const bool in_range = taus[i] > 1.0 && taus[i] < 2.5;
      csv << format_double(taus[i]) << ',' << format_double(errors[i]) << ','
          << (i == best ? 1 : 0) << ',' << (in_range ? 1 : 0) << '\n';
    }
    fs::create_directories(dir);
    write_file(dir / "tau_sweep.csv", csv.str());
    out << "best tau " << format_double(taus[best]) << " (top-1 error "
        << format_double(errors[best]) << ")\n";
    return kExitOk;
  });
}

int cmd_gradcheck(std::uint64_t seed, bool inject_fault, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    GradcheckOptions opts;
    opts.seed = seed;
    opts.corrupt_gradient = inject_fault;
    const GradcheckResult res = run_gradcheck(opts);
    out << "gradcheck: " << res.configs << " random configurations, step " << opts.step
        << ", tolerance " << opts.tolerance << '\n';
    for (const auto& l : res.losses) {
      out << "  " << std::left << std::setw(5) << l.name << " max rel error "
          << std::scientific << std::setprecision(3) << l.max_rel_error << std::defaultfloat
          << " over " << l.entries << " entries "
          << (l.max_rel_error <= opts.tolerance ? "ok" : "FAIL") << '\n';
    }
    out << (res.passed ? "PASS" : "FAIL") << '\n';
    return res.passed ? kExitOk : kExitNumeric;
  });
}

int cmd_eval(const fs::path& model_path, const fs::path& csv_path, std::ostream& out,
             std::ostream& err) {
  return guarded(err, [&] {
    std::ifstream in(model_path);
    if (!in) throw ConfigError("cannot read model file: " + model_path.string());
    Model model;
    try {
      model = model_from_json(json::parse(in));
    } catch (const json::exception& e) {
      throw ConfigError(model_path.string() + ": " + e.what());
    }
    if (!fs::exists(csv_path)) throw ConfigError("missing CSV file: " + csv_path.string());
    const Dataset data = load_csv_dataset(csv_path);
    if (data.empty()) throw ConfigError(csv_path.string() + ": no samples");
    if (data.front().features.size() != model.input_dim()) {
      throw ConfigError("dataset has " + std::to_string(data.front().features.size()) +
                        " features, model expects " + std::to_string(model.input_dim()));
    }
    const Prediction pred = predict(model, data);
    std::vector<std::size_t> labels;
    for (const auto& s : data) labels.push_back(s.label);
    const EvalReport report =
        classification_metrics(confusion(pred.classes, labels, model.head_classes()));
    out << report_to_json(report).dump(2) << '\n';
    return kExitOk;
  });
}

}  // namespace icda::cli
