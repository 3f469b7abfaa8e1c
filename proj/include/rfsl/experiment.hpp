#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "rfsl/samplers.hpp"
#include "rfsl/schedules.hpp"

namespace rfsl {

enum class DeltaRule { MinInvNInvD, Fixed };

// Sweep over (d, N, sampler, grid, seed) for the low-rank target
// N(mean_value * 1, diag(I_k, 0)).
struct ExperimentSpec {
  std::vector<std::size_t> dims{10, 50, 100, 200, 400, 800};
  std::size_t intrinsic_dim = 8;
  std::vector<std::size_t> n_steps{100, 200};
  std::vector<SamplerKind> samplers{SamplerKind::Rf};
  std::vector<GridKind> grids{GridKind::UShaped, GridKind::Uniform};
  std::size_t num_samples = 2000;
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  DeltaRule delta_rule = DeltaRule::MinInvNInvD;
  double delta = 0.0;  // used when delta_rule == Fixed
  std::size_t rounds = 10;
  double c0 = 2.0;
  double c1 = 4.0;
  double mean_value = 8.0;
  std::string output;    // CSV path; empty disables file output
  std::string manifest;  // JSON path; empty disables the manifest
};

// Throws DomainError when lists are empty, k > min(dims), or num_samples < 200.
void validate_spec(const ExperimentSpec& spec);

// "key = value" file; keys: dims, intrinsic_dim, n_steps, samplers, grids,
// num_samples, seeds, delta ("auto" or a number), rounds, c0, c1, mean_value,
// output, manifest. Unknown keys raise ParseError naming the key.
ExperimentSpec parse_config_text(const std::string& text, const std::string& source = "<string>");
ExperimentSpec parse_config(const std::string& path);
std::string format_config(const ExperimentSpec& spec);

struct ResultRow {
  std::size_t d = 0;
  std::size_t k = 0;
  std::size_t n_steps = 0;
  SamplerKind sampler = SamplerKind::Rf;
  GridKind grid = GridKind::UShaped;
  std::uint64_t seed = 0;
  double tv = 0.0;
  double tv_stderr = 0.0;
  double wall_ms = 0.0;
};

struct Cell {
  std::size_t d;
  std::size_t n_steps;
  SamplerKind sampler;
  GridKind grid;
  std::uint64_t seed;
};

// Cells in spec order (d, N, sampler, grid, seed), skipping pairs that cannot
// run: score-based samplers on grids starting at t = 0, and the ddpm sampler on
// any grid other than the DDPM-induced one.
std::vector<Cell> expand_cells(const ExperimentSpec& spec);
bool cell_supported(SamplerKind sampler, GridKind grid);

// Terminal samples of one cell and the blurred reference it is scored against.
struct CellData {
  SampleBatch samples;
  SampleBatch reference;
  double reference_delta = 0.0;
};
CellData generate_cell(const ExperimentSpec& spec, const Cell& cell);
ResultRow run_cell(const ExperimentSpec& spec, const Cell& cell);

// Runs every cell (in parallel across cells) and returns rows in spec order.
// With spec.output set, rows are appended to the CSV in spec order as soon as
// all earlier cells are done; on error the completed prefix is followed by a
// FAILED marker row and the error is rethrown. The CSV omits wall times so that
// repeated runs are byte-identical; the manifest records them.
std::vector<ResultRow> run_fig2_experiment(const ExperimentSpec& spec, std::size_t threads = 1);

void write_result_header(std::ostream& out);
void write_result_row(std::ostream& out, const ResultRow& row);

// Git blob id (SHA-1 of "blob <len>\0" + content), hex encoded.
std::string git_blob_hash(const std::string& content);

}  // namespace rfsl
