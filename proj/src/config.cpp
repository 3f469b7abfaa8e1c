#include <sstream>

#include "kv_parse.hpp"
#include "rfsl/error.hpp"
#include "rfsl/experiment.hpp"
#include "rfsl/io.hpp"

namespace rfsl {

void validate_spec(const ExperimentSpec& spec) {
  if (spec.dims.empty() || spec.n_steps.empty() || spec.samplers.empty() || spec.grids.empty() ||
      spec.seeds.empty())
    throw DomainError("experiment lists must be nonempty");
  for (std::size_t d : spec.dims)
    if (spec.intrinsic_dim > d) throw DomainError("intrinsic_dim exceeds a swept dimension");
  if (spec.intrinsic_dim == 0) throw DomainError("intrinsic_dim must be positive");
  if (spec.num_samples < 200) throw DomainError("num_samples must be at least 200");
  if (spec.rounds == 0) throw DomainError("rounds must be positive");
  if (spec.delta_rule == DeltaRule::Fixed && !(spec.delta > 0.0 && spec.delta < 0.5))
    throw DomainError("fixed delta must lie in (0, 1/2)");
}

ExperimentSpec parse_config_text(const std::string& text, const std::string& source) {
  using namespace detail;
  ExperimentSpec spec;
  for (const auto& kv : read_kv_lines(text, source)) {
    if (!kv.section.empty()) throw ParseError(source, kv.line, kv.section, "unknown section");
    const auto& k = kv.key;
    try {
      if (k == "dims") {
        spec.dims = parse_size_list(kv, source);
      } else if (k == "intrinsic_dim" || k == "k") {
        spec.intrinsic_dim = parse_size(kv.value, source, kv);
      } else if (k == "n_steps") {
        spec.n_steps = parse_size_list(kv, source);
      } else if (k == "samplers") {
        spec.samplers.clear();
        for (const auto& s : split_list(kv.value)) spec.samplers.push_back(sampler_kind_from_string(s));
      } else if (k == "grids") {
        spec.grids.clear();
        for (const auto& s : split_list(kv.value)) spec.grids.push_back(grid_kind_from_string(s));
      } else if (k == "num_samples") {
        spec.num_samples = parse_size(kv.value, source, kv);
      } else if (k == "seeds") {
        spec.seeds.clear();
        for (std::size_t s : parse_size_list(kv, source)) spec.seeds.push_back(s);
      } else if (k == "delta") {
        if (kv.value == "auto") {
          spec.delta_rule = DeltaRule::MinInvNInvD;
        } else {
          spec.delta_rule = DeltaRule::Fixed;
          spec.delta = parse_double(kv.value, source, kv);
        }
      } else if (k == "rounds") {
        spec.rounds = parse_size(kv.value, source, kv);
      } else if (k == "c0") {
        spec.c0 = parse_double(kv.value, source, kv);
      } else if (k == "c1") {
        spec.c1 = parse_double(kv.value, source, kv);
      } else if (k == "mean_value") {
        spec.mean_value = parse_double(kv.value, source, kv);
      } else if (k == "output") {
        spec.output = kv.value;
      } else if (k == "manifest") {
        spec.manifest = kv.value;
      } else {
        throw ParseError(source, kv.line, k, "unknown key");
      }
    } catch (const DomainError& e) {
      throw ParseError(source, kv.line, k, e.what());
    }
  }
  try {
    validate_spec(spec);
  } catch (const DomainError& e) {
    throw ParseError(source, 0, "", e.what());
  }
  return spec;
}

ExperimentSpec parse_config(const std::string& path) { return parse_config_text(detail::read_file(path), path); }

std::string format_config(const ExperimentSpec& spec) {
  std::ostringstream out;
  auto list = [&](const char* key, const auto& items, auto fmt) {
    out << key << " = ";
    for (std::size_t i = 0; i < items.size(); ++i) out << (i ? ", " : "") << fmt(items[i]);
    out << '\n';
  };
  auto ident = [](auto v) { return v; };
  list("dims", spec.dims, ident);
  out << "intrinsic_dim = " << spec.intrinsic_dim << '\n';
  list("n_steps", spec.n_steps, ident);
  list("samplers", spec.samplers, [](SamplerKind s) { return to_string(s); });
  list("grids", spec.grids, [](GridKind g) { return to_string(g); });
  out << "num_samples = " << spec.num_samples << '\n';
  list("seeds", spec.seeds, ident);
  out << "delta = " << (spec.delta_rule == DeltaRule::Fixed ? format_double(spec.delta) : "auto") << '\n';
  out << "rounds = " << spec.rounds << '\n';
  out << "c0 = " << format_double(spec.c0) << '\n';
  out << "c1 = " << format_double(spec.c1) << '\n';
  out << "mean_value = " << format_double(spec.mean_value) << '\n';
  if (!spec.output.empty()) out << "output = " << spec.output << '\n';
  if (!spec.manifest.empty()) out << "manifest = " << spec.manifest << '\n';
  return out.str();
}

}  // namespace rfsl
