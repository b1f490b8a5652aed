#include "dsq/config.hpp"
#include "dsq/errors.hpp"
#include "dsq/experiments.hpp"
#include "dsq/measure.hpp"
#include "dsq/noise.hpp"
#include "dsq/output.hpp"
#include "dsq/seqlang.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

struct RunOptions {
  std::string config;
  std::vector<std::string> sets;
  std::string out;
};

void add_run_options(CLI::App* cmd, RunOptions& o) {
  cmd->add_option("--config", o.config, "config file (key = value) or a JSON sidecar");
  cmd->add_option("--set", o.sets, "override a key, key=value")->allow_extra_args(false);
  cmd->add_option("-o,--out", o.out, "output prefix for <prefix>.csv and <prefix>.json");
}

dsq::RunConfig resolve(const std::string& experiment, const RunOptions& o) {
  dsq::RunConfig cfg = dsq::RunConfig::for_experiment(experiment);
  if (!o.config.empty()) cfg.load_file(o.config);
  for (const auto& s : o.sets) cfg.set_assignment(s);
  return cfg;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw dsq::ValidationError("cannot write " + path);
  f << text;
}

void emit(const dsq::ExperimentResult& r, const std::string& prefix) {
  write_file(prefix + ".csv", dsq::to_csv(r));
  write_file(prefix + ".json", dsq::to_json(r));
  for (const auto& f : r.fits) {
    std::cerr << f.model << " (reduced chi2 " << dsq::format_exact(f.reduced_chi2) << ")\n";
    for (const auto& p : f.parameters) {
      std::cerr << "  " << p.name << " = " << dsq::format_exact(p.value) << " +- "
                << dsq::format_exact(p.uncertainty) << (p.unit.empty() ? "" : " " + p.unit) << '\n';
    }
  }
  std::cerr << "wrote " << prefix << ".csv and " << prefix << ".json\n";
}

dsq::Schedule load_sequence(const std::string& source, bool inline_text, std::string& name) {
  dsq::SequenceSource src;
  if (inline_text) {
    src.text = source;
    std::replace(src.text.begin(), src.text.end(), ';', '\n');
    src.name = "<inline>";
  } else {
    std::ifstream f(source, std::ios::binary);
    if (!f) throw dsq::ValidationError("cannot read sequence file " + source);
    std::ostringstream ss;
    ss << f.rdbuf();
    src.text = ss.str();
    src.name = source;
  }
  name = src.name;
  dsq::ParseResult r = dsq::parse(src);
  for (const auto& d : r.diagnostics) std::cerr << dsq::format_diagnostic(d, src.name) << '\n';
  if (!r.ok()) throw dsq::ValidationError("sequence has errors");
  return std::move(*r.schedule);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dressed-state qubit simulator"};
  app.require_subcommand(1);

  RunOptions run_opts;
  std::string experiment;
  auto* run = app.add_subcommand("run", "run a named experiment sweep");
  run->add_option("experiment", experiment, "experiment name")->required();
  add_run_options(run, run_opts);

  RunOptions seq_opts;
  std::string seq_source;
  bool seq_inline = false;
  auto* seq = app.add_subcommand("seq", "run a raw sequence");
  seq->add_option("sequence", seq_source, "sequence file")->required();
  seq->add_flag("--inline", seq_inline, "treat the argument as sequence text with ';' between lines");
  add_run_options(seq, seq_opts);

  std::string dump_source;
  bool dump_inline = false;
  int dump_samples = 32;
  auto* dump = app.add_subcommand("dump-controls", "print the control dump of a sequence as CSV");
  dump->add_option("sequence", dump_source, "sequence file")->required();
  dump->add_flag("--inline", dump_inline, "treat the argument as sequence text with ';' between lines");
  dump->add_option("--samples", dump_samples, "samples per segment")->check(CLI::PositiveNumber);

  RunOptions det_opts;
  int det_shots = 100000;
  auto* det = app.add_subcommand("detector-fidelity", "Monte-Carlo detection fidelity");
  det->add_option("--config", det_opts.config, "config file");
  det->add_option("--set", det_opts.sets, "override a key, key=value");
  det->add_option("--shots", det_shots, "shots per manifold");

  std::string t2_text;
  int cal_shots = 2000;
  long long cal_seed = 1;
  auto* cal = app.add_subcommand("calibrate-noise", "quasi-static sigma for a bare Ramsey T2");
  cal->add_option("--t2", t2_text, "target 1/e time, e.g. 40ms")->required();
  cal->add_option("--shots", cal_shots, "shots");
  cal->add_option("--seed", cal_seed, "seed");

  auto* list = app.add_subcommand("list-experiments", "list experiment names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*run) {
      const dsq::RunConfig cfg = resolve(experiment, run_opts);
      emit(dsq::run_experiment(cfg), run_opts.out.empty() ? experiment : run_opts.out);
    } else if (*seq) {
      std::string name;
      const dsq::Schedule s = load_sequence(seq_source, seq_inline, name);
      const dsq::RunConfig cfg = resolve("seq", seq_opts);
      emit(dsq::run_sequence(s, cfg), seq_opts.out.empty() ? "seq" : seq_opts.out);
    } else if (*dump) {
      std::string name;
      const dsq::Schedule s = load_sequence(dump_source, dump_inline, name);
      dsq::write_control_dump_csv(std::cout, dsq::control_dump(s, dump_samples));
    } else if (*det) {
      const dsq::RunConfig cfg = resolve("seq", det_opts);
      const dsq::DetectorModel d = cfg.detector();
      const auto mc = dsq::fidelity_report(d, det_shots, static_cast<std::uint64_t>(cfg.integer("seed")));
      const auto exact = dsq::analytic_fidelity(d);
      std::cout << "quantity,monte_carlo,analytic\n"
                << "f_bright," << dsq::format_exact(mc.f_bright) << ',' << dsq::format_exact(exact.f_bright) << '\n'
                << "f_dark," << dsq::format_exact(mc.f_dark) << ',' << dsq::format_exact(exact.f_dark) << '\n'
                << "f_mean," << dsq::format_exact(mc.f_mean) << ',' << dsq::format_exact(exact.f_mean) << '\n';
    } else if (*cal) {
      const auto q = dsq::parse_quantity(t2_text, dsq::Dimension::Time);
      if (!q.quantity) throw dsq::ValidationError("--t2: " + q.error);
      dsq::CalibrationOptions opt;
      opt.shots = cal_shots;
      opt.seed = static_cast<std::uint64_t>(cal_seed);
      const auto r = dsq::calibrate_quasi_static(q.quantity->value, dsq::PhysicalConstants{}, opt);
      std::cout << "noise_qs_sigma = " << dsq::format_quantity(r.sigma_b, dsq::Dimension::Field) << '\n'
                << "# analytic " << dsq::format_quantity(r.analytic_seed, dsq::Dimension::Field) << ", contrast at T2 "
                << dsq::format_exact(r.contrast_at_t2) << ", " << r.iterations << " iterations\n";
    } else if (*list) {
      for (const auto& e : dsq::experiment_registry()) std::cout << e.name << "  " << e.description << '\n';
    }
  } catch (const dsq::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const dsq::BasisError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const dsq::FitError& e) {
    std::cerr << "fit failed: " << e.what() << '\n';
    return 2;
  } catch (const dsq::IntegrationError& e) {
    std::cerr << "integration failed: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
