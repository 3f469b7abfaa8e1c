#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>

#include "rfsl/checks.hpp"
#include "rfsl/error.hpp"
#include "rfsl/experiment.hpp"
#include "rfsl/io.hpp"
#include "rfsl/metrics.hpp"
#include "rfsl/samplers.hpp"
#include "rfsl/schedules.hpp"
#include "rfsl/targets.hpp"

namespace {

struct Global {
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  std::string out;
};

// Writes to --out when given, stdout otherwise.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file_) throw std::runtime_error("cannot open '" + path + "' for writing");
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

struct GridArgs {
  std::string kind = "ushaped";
  std::size_t n_steps = 100;
  double delta = 0.0;  // 0 selects the default rule
  double c0 = 2.0;
  double c1 = 4.0;
};

void add_grid_options(CLI::App* cmd, GridArgs& g) {
  cmd->add_option("--grid", g.kind, "uniform, ushaped or ddpm")
      ->check(CLI::IsMember({"uniform", "ushaped", "ddpm"}));
  cmd->add_option("--n-steps", g.n_steps, "number of steps N");
  cmd->add_option("--delta", g.delta, "terminal gap of the U-shaped grid (default min(1/N, 1/d))");
  cmd->add_option("--c0", g.c0, "DDPM schedule exponent c0");
  cmd->add_option("--c1", g.c1, "DDPM schedule rate c1");
}

struct BuiltGrid {
  rfsl::TimeGrid grid;
  std::optional<rfsl::DdpmSchedule> schedule;
};

BuiltGrid build_grid(const GridArgs& g, std::optional<std::size_t> dim) {
  BuiltGrid b;
  switch (rfsl::grid_kind_from_string(g.kind)) {
    case rfsl::GridKind::Uniform:
      b.grid = rfsl::build_uniform_grid(g.n_steps);
      break;
    case rfsl::GridKind::UShaped:
      b.grid = rfsl::build_ushaped_grid(g.n_steps, g.delta > 0.0 ? g.delta : rfsl::default_delta(g.n_steps, dim));
      break;
    case rfsl::GridKind::DdpmInduced:
      b.schedule = rfsl::build_ddpm_schedule(g.n_steps, g.c0, g.c1);
      b.grid = rfsl::ddpm_induced_rf_grid(*b.schedule);
      break;
  }
  return b;
}

int cmd_schedule(const Global& gl, const GridArgs& g, std::optional<std::size_t> dim) {
  const auto b = build_grid(g, dim);
  Sink sink(gl.out);
  auto& out = sink.stream();
  out << "index,t,eta\n";
  const auto& t = b.grid.times;
  for (std::size_t i = 0; i < t.size(); ++i) {
    out << i << ',' << rfsl::format_double(t[i]) << ',';
    if (i + 1 < t.size()) out << rfsl::format_double(t[i + 1] - t[i]);
    out << '\n';
  }
  return 0;
}

struct SampleArgs {
  std::string sampler = "rf";
  std::string target;
  std::size_t num_samples = 2000;
  bool record = false;
  bool final_step = false;
};

int cmd_sample(const Global& gl, const GridArgs& g, const SampleArgs& a) {
  const rfsl::Target target = rfsl::parse_target_file(a.target);
  const rfsl::FieldOracle oracle(target);
  const auto kind = rfsl::sampler_kind_from_string(a.sampler);
  const auto b = build_grid(g, target.dim());
  rfsl::SamplerOptions opt;
  opt.threads = gl.threads;
  opt.record_trajectories = a.record;
  opt.final_step = a.final_step;

  rfsl::SampleBatch batch;
  switch (kind) {
    case rfsl::SamplerKind::Rf:
      batch = rfsl::rf_euler(oracle, b.grid, a.num_samples, gl.seed, opt);
      break;
    case rfsl::SamplerKind::StocRf:
      batch = rfsl::stoc_rf(oracle, b.grid, a.num_samples, gl.seed, opt);
      break;
    case rfsl::SamplerKind::Langevin:
      batch = rfsl::langevin_rf(oracle, b.grid, a.num_samples, gl.seed, opt);
      break;
    case rfsl::SamplerKind::DdimRf:
      batch = rfsl::ddim_rf(oracle, b.grid, a.num_samples, gl.seed, opt);
      break;
    case rfsl::SamplerKind::Ddpm:
      if (!b.schedule) throw rfsl::DomainError("the ddpm sampler needs --grid ddpm");
      batch = rfsl::ddpm_sample(oracle, *b.schedule, a.num_samples, gl.seed, opt);
      break;
  }
  Sink sink(gl.out);
  if (a.record)
    rfsl::write_trajectory_csv(sink.stream(), batch);
  else
    rfsl::write_samples_csv(sink.stream(), batch.data);
  return 0;
}

int cmd_tv(const Global& gl, const std::string& fa, const std::string& fb, std::size_t rounds) {
  const auto a = rfsl::read_samples_csv(fa);
  const auto b = rfsl::read_samples_csv(fb);
  rfsl::TvOptions opt;
  opt.rounds = rounds;
  opt.threads = gl.threads;
  const auto est = rfsl::estimate_tv(a, b, gl.seed, opt);
  Sink sink(gl.out);
  sink.stream() << "tv,std_error,rounds\n"
                << rfsl::format_double(est.value) << ',' << rfsl::format_double(est.std_error) << ',' << est.rounds
                << '\n';
  return 0;
}

int cmd_check(const Global& gl, const std::string& suite) {
  std::vector<rfsl::CheckRecord> records;
  if (suite == "all") {
    for (const auto& s : rfsl::check_suite_names()) {
      auto r = rfsl::run_check_suite(s, gl.seed, gl.threads);
      for (auto& rec : r) rec.name = s + "/" + rec.name;
      records.insert(records.end(), r.begin(), r.end());
    }
  } else {
    records = rfsl::run_check_suite(suite, gl.seed, gl.threads);
  }
  Sink sink(gl.out);
  rfsl::write_check_report(sink.stream(), records);
  for (const auto& r : records)
    if (!r.pass) return 1;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rectified-flow, stochastic-localization and DDPM samplers with grid and TV tooling"};
  app.require_subcommand(1);
  app.fallthrough();

  Global gl;
  app.add_option("--seed", gl.seed, "master seed");
  app.add_option("--threads", gl.threads, "worker threads (0 = hardware concurrency)");
  app.add_option("--out", gl.out, "output file (stdout when omitted)");

  GridArgs sched_grid;
  std::optional<std::size_t> sched_dim;
  auto* schedule = app.add_subcommand("schedule", "print a time grid as index,t,eta");
  add_grid_options(schedule, sched_grid);
  schedule->add_option("--dim", sched_dim, "data dimension for the default delta rule");

  GridArgs sample_grid;
  SampleArgs sample_args;
  auto* sample = app.add_subcommand("sample", "draw samples with one of the samplers");
  sample->add_option("--sampler", sample_args.sampler)
      ->check(CLI::IsMember({"rf", "stoc-rf", "langevin", "ddpm", "ddim-rf"}));
  sample->add_option("--target", sample_args.target, "target description file")->required();
  add_grid_options(sample, sample_grid);
  sample->add_option("--num-samples", sample_args.num_samples);
  sample->add_flag("--record-trajectories", sample_args.record, "write every grid time (adds step,t columns)");
  sample->add_flag("--final-step", sample_args.final_step, "also step from t_{N-1} to 1");

  std::string tv_a, tv_b;
  std::size_t tv_rounds = 10;
  auto* tv = app.add_subcommand("tv", "classifier-based total variation estimate between two sample CSVs");
  tv->add_option("--a", tv_a)->required();
  tv->add_option("--b", tv_b)->required();
  tv->add_option("--rounds", tv_rounds);

  std::string suite = "all";
  auto* check = app.add_subcommand("check", "run numerical self-checks");
  check->add_option("--suite", suite)->check(CLI::IsMember({"grid", "equivalence", "covariance", "identities", "all"}));

  auto* experiment = app.add_subcommand("experiment", "run experiment sweeps");
  experiment->require_subcommand(1);
  std::string config_path, manifest;
  auto* fig2 = experiment->add_subcommand("fig2", "TV versus dimension sweep for the low-rank target");
  fig2->add_option("--config", config_path, "experiment config file");
  fig2->add_option("--manifest", manifest, "JSON manifest path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*schedule) return cmd_schedule(gl, sched_grid, sched_dim);
    if (*sample) return cmd_sample(gl, sample_grid, sample_args);
    if (*tv) return cmd_tv(gl, tv_a, tv_b, tv_rounds);
    if (*check) return cmd_check(gl, suite);
    if (*fig2) {
      rfsl::ExperimentSpec spec = config_path.empty() ? rfsl::ExperimentSpec{} : rfsl::parse_config(config_path);
      if (!gl.out.empty()) spec.output = gl.out;
      if (!manifest.empty()) spec.manifest = manifest;
      if (spec.output.empty()) spec.output = "fig2.csv";
      if (app.count("--seed") > 0) spec.seeds = {gl.seed};
      rfsl::run_fig2_experiment(spec, gl.threads);
      return 0;
    }
  } catch (const rfsl::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const rfsl::DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
