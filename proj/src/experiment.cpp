#include "rfsl/experiment.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <exception>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>

#include "json.hpp"
#include "rfsl/error.hpp"
#include "rfsl/io.hpp"
#include "rfsl/kernels.hpp"
#include "rfsl/metrics.hpp"
#include "rfsl/parallel.hpp"
#include "rfsl/rng.hpp"

namespace rfsl {

bool cell_supported(SamplerKind sampler, GridKind grid) {
  if (sampler == SamplerKind::Ddpm) return grid == GridKind::DdpmInduced;
  if (requires_positive_start(sampler)) return grid == GridKind::DdpmInduced;
  return true;
}

std::vector<Cell> expand_cells(const ExperimentSpec& spec) {
  std::vector<Cell> cells;
  for (std::size_t d : spec.dims)
    for (std::size_t n : spec.n_steps)
      for (SamplerKind s : spec.samplers)
        for (GridKind g : spec.grids)
          if (cell_supported(s, g))
            for (std::uint64_t seed : spec.seeds) cells.push_back({d, n, s, g, seed});
  return cells;
}

CellData generate_cell(const ExperimentSpec& spec, const Cell& cell) {
  const Target target = Target::low_rank(cell.d, spec.intrinsic_dim, spec.mean_value);
  const FieldOracle oracle(target);
  const double rule_delta =
      spec.delta_rule == DeltaRule::Fixed ? spec.delta : default_delta(cell.n_steps, cell.d);

  // Seeds depend on (seed, d) only, so grids and samplers share random inputs.
  using rng::Domain;
  const auto sample_seed = rng::substream_key(cell.seed, Domain::Experiment, 1, cell.d);
  const auto ref_seed = rng::substream_key(cell.seed, Domain::Experiment, 2, cell.d);
  const auto blur_seed = rng::substream_key(cell.seed, Domain::Experiment, 3, cell.d);

  CellData out;
  TimeGrid grid;
  std::optional<DdpmSchedule> schedule;
  switch (cell.grid) {
    case GridKind::UShaped:
      grid = build_ushaped_grid(cell.n_steps, rule_delta);
      out.reference_delta = grid.delta;
      break;
    case GridKind::Uniform:
      grid = build_uniform_grid(cell.n_steps);
      out.reference_delta = rule_delta;
      break;
    case GridKind::DdpmInduced:
      schedule = build_ddpm_schedule(cell.n_steps, spec.c0, spec.c1);
      grid = ddpm_induced_rf_grid(*schedule);
      out.reference_delta = grid.delta;
      break;
  }

  const std::size_t n = spec.num_samples;
  switch (cell.sampler) {
    case SamplerKind::Rf:
      out.samples = rf_euler(oracle, grid, n, sample_seed);
      break;
    case SamplerKind::StocRf:
      out.samples = stoc_rf(oracle, grid, n, sample_seed);
      break;
    case SamplerKind::Langevin:
      out.samples = langevin_rf(oracle, grid, n, sample_seed);
      break;
    case SamplerKind::DdimRf:
      out.samples = ddim_rf(oracle, grid, n, sample_seed);
      break;
    case SamplerKind::Ddpm:
      if (!schedule) throw DomainError("ddpm sampler requires the ddpm grid");
      out.samples = ddpm_sample(oracle, *schedule, n, sample_seed);
      break;
  }
  out.reference = blur_samples(sample_target(target, n, ref_seed), out.reference_delta, blur_seed);
  return out;
}

ResultRow run_cell(const ExperimentSpec& spec, const Cell& cell) {
  const auto start = std::chrono::steady_clock::now();
  const CellData data = generate_cell(spec, cell);
  TvOptions opt;
  opt.rounds = spec.rounds;
  const auto tv_seed = rng::substream_key(cell.seed, rng::Domain::Experiment, 4, cell.d);
  const TvEstimate tv = estimate_tv(data.samples.data, data.reference.data, tv_seed, opt);
  const auto stop = std::chrono::steady_clock::now();

  ResultRow row;
  row.d = cell.d;
  row.k = spec.intrinsic_dim;
  row.n_steps = cell.n_steps;
  row.sampler = cell.sampler;
  row.grid = cell.grid;
  row.seed = cell.seed;
  row.tv = tv.value;
  row.tv_stderr = tv.std_error;
  row.wall_ms = std::max(std::chrono::duration<double, std::milli>(stop - start).count(), 1e-3);
  return row;
}

void write_result_header(std::ostream& out) { out << "d,k,N,sampler,grid,seed,tv,tv_stderr\n"; }

void write_result_row(std::ostream& out, const ResultRow& r) {
  out << r.d << ',' << r.k << ',' << r.n_steps << ',' << to_string(r.sampler) << ',' << to_string(r.grid) << ','
      << r.seed << ',' << format_double(r.tv) << ',' << format_double(r.tv_stderr) << '\n';
}

std::string git_blob_hash(const std::string& content) {
  const std::string blob = "blob " + std::to_string(content.size()) + '\0' + content;
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(blob.data(), blob.size(), md, &len, EVP_sha1(), nullptr) != 1)
    throw std::runtime_error("SHA-1 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

namespace {

void write_manifest(const ExperimentSpec& spec, const std::vector<ResultRow>& rows, double total_ms) {
  using nlohmann::json;
  const std::string config = format_config(spec);
  json m;
  m["config"] = config;
  m["config_hash"] = git_blob_hash(config);
  if (!spec.output.empty()) {
    std::ifstream in(spec.output, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    m["output"] = spec.output;
    m["output_hash"] = git_blob_hash(ss.str());
  }
  m["kernels"] = std::string(kernels::active().name);
  m["total_wall_ms"] = total_ms;
  json cells = json::array();
  for (const auto& r : rows) {
    cells.push_back({{"d", r.d},
                     {"N", r.n_steps},
                     {"sampler", std::string(to_string(r.sampler))},
                     {"grid", std::string(to_string(r.grid))},
                     {"seed", r.seed},
                     {"tv", r.tv},
                     {"wall_ms", r.wall_ms}});
  }
  m["cells"] = std::move(cells);
  std::ofstream out(spec.manifest, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + spec.manifest + "' for writing");
  out << m.dump(2) << '\n';
}

}  // namespace

std::vector<ResultRow> run_fig2_experiment(const ExperimentSpec& spec, std::size_t threads) {
  validate_spec(spec);
  const auto start = std::chrono::steady_clock::now();
  const auto cells = expand_cells(spec);

  std::ofstream csv;
  if (!spec.output.empty()) {
    csv.open(spec.output, std::ios::binary);
    if (!csv) throw std::runtime_error("cannot open '" + spec.output + "' for writing");
    write_result_header(csv);
    csv.flush();
  }

  std::vector<std::optional<ResultRow>> rows(cells.size());
  std::vector<std::exception_ptr> errors(cells.size());
  std::vector<char> done(cells.size(), 0);
  std::size_t next = 0;
  bool stopped = false;
  std::mutex mu;

  parallel_for(
      cells.size(), threads,
      [&](std::size_t begin, std::size_t end) {
        for (std::size_t c = begin; c < end; ++c) {
          {
            std::lock_guard lock(mu);
            if (stopped) return;
          }
          try {
            rows[c] = run_cell(spec, cells[c]);
          } catch (...) {
            errors[c] = std::current_exception();
          }
          std::lock_guard lock(mu);
          done[c] = 1;
          while (!stopped && next < cells.size() && done[next]) {
            if (errors[next]) {
              stopped = true;
              if (csv.is_open()) {
                std::string what = "unknown error";
                try {
                  std::rethrow_exception(errors[next]);
                } catch (const std::exception& e) {
                  what = e.what();
                } catch (...) {
                }
                for (auto& ch : what)
                  if (ch == ',' || ch == '\n') ch = ' ';
                const Cell& f = cells[next];
                csv << "FAILED," << f.d << ',' << f.n_steps << ',' << to_string(f.sampler) << ','
                    << to_string(f.grid) << ',' << f.seed << ',' << what << '\n';
                csv.flush();
              }
              break;
            }
            if (csv.is_open()) {
              write_result_row(csv, *rows[next]);
              csv.flush();
            }
            ++next;
          }
        }
      },
      1);

  for (std::size_t c = 0; c < cells.size(); ++c)
    if (errors[c]) std::rethrow_exception(errors[c]);
  if (stopped) throw std::runtime_error("experiment stopped early");
  if (csv.is_open()) csv.close();

  std::vector<ResultRow> out;
  out.reserve(rows.size());
  for (auto& r : rows) out.push_back(*r);
  const double total_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  if (!spec.manifest.empty()) write_manifest(spec, out, total_ms);
  return out;
}

}  // namespace rfsl
