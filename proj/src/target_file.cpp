#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>

#include "kv_parse.hpp"
#include "rfsl/error.hpp"
#include "rfsl/targets.hpp"

namespace rfsl {

namespace detail {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::vector<KvLine> read_kv_lines(std::string_view text, const std::string& source) {
  std::vector<KvLine> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;

    KvLine kv;
    kv.line = line_no;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) throw ParseError(source, line_no, "", "malformed section header");
      kv.section = trim(std::string_view(line).substr(1, line.size() - 2));
      out.push_back(std::move(kv));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(source, line_no, line, "expected key = value");
    kv.key = trim(std::string_view(line).substr(0, eq));
    kv.value = trim(std::string_view(line).substr(eq + 1));
    if (kv.key.empty()) throw ParseError(source, line_no, "", "empty key");
    if (kv.value.empty()) throw ParseError(source, line_no, kv.key, "empty value");
    out.push_back(std::move(kv));
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, 0, "", "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> split_list(std::string_view value) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= value.size()) {
    const auto comma = value.find(',', pos);
    out.push_back(trim(value.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

double parse_double(const std::string& text, const std::string& source, const KvLine& at) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty())
    throw ParseError(source, at.line, at.key, "not a number: '" + text + "'");
  return v;
}

std::size_t parse_size(const std::string& text, const std::string& source, const KvLine& at) {
  std::size_t v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end || text.empty())
    throw ParseError(source, at.line, at.key, "not a non-negative integer: '" + text + "'");
  return v;
}

std::vector<double> parse_double_list(const KvLine& at, const std::string& source) {
  std::vector<double> out;
  for (const auto& item : split_list(at.value)) out.push_back(parse_double(item, source, at));
  return out;
}

std::vector<std::size_t> parse_size_list(const KvLine& at, const std::string& source) {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(at.value)) out.push_back(parse_size(item, source, at));
  return out;
}

}  // namespace detail

namespace {

struct PendingComponent {
  std::size_t line = 0;
  std::optional<double> weight;
  std::optional<detail::KvLine> mean, var;
};

std::vector<double> broadcast(const detail::KvLine& at, std::size_t dim, const std::string& source) {
  auto values = detail::parse_double_list(at, source);
  if (values.size() == 1) return std::vector<double>(dim, values.front());
  if (values.size() != dim)
    throw ParseError(source, at.line, at.key,
                     "expected 1 or " + std::to_string(dim) + " values, got " + std::to_string(values.size()));
  return values;
}

}  // namespace

Target parse_target_text(std::string_view text, const std::string& source) {
  std::optional<std::size_t> dim;
  std::optional<std::size_t> intrinsic;
  std::vector<PendingComponent> pending;

  for (const auto& kv : detail::read_kv_lines(text, source)) {
    if (!kv.section.empty()) {
      if (kv.section != "component") throw ParseError(source, kv.line, kv.section, "unknown section");
      pending.push_back(PendingComponent{kv.line, {}, {}, {}});
      continue;
    }
    if (pending.empty()) {
      if (kv.key == "dim")
        dim = detail::parse_size(kv.value, source, kv);
      else if (kv.key == "intrinsic_dim")
        intrinsic = detail::parse_size(kv.value, source, kv);
      else
        throw ParseError(source, kv.line, kv.key, "unknown key '" + kv.key + "'");
      continue;
    }
    auto& c = pending.back();
    if (kv.key == "weight")
      c.weight = detail::parse_double(kv.value, source, kv);
    else if (kv.key == "mean")
      c.mean = kv;
    else if (kv.key == "var")
      c.var = kv;
    else
      throw ParseError(source, kv.line, kv.key, "unknown key '" + kv.key + "' in [component]");
  }

  if (!dim || *dim == 0) throw ParseError(source, 0, "dim", "missing or zero 'dim'");
  if (pending.empty()) throw ParseError(source, 0, "component", "no [component] block");

  std::vector<GaussianComponent> comps;
  for (const auto& p : pending) {
    if (!p.mean) throw ParseError(source, p.line, "mean", "component without 'mean'");
    if (!p.var) throw ParseError(source, p.line, "var", "component without 'var'");
    comps.push_back(GaussianComponent{p.weight.value_or(pending.size() == 1 ? 1.0 : 0.0),
                                      broadcast(*p.mean, *dim, source), broadcast(*p.var, *dim, source)});
  }
  try {
    return Target(std::move(comps), intrinsic);
  } catch (const DomainError& e) {
    throw ParseError(source, 0, "", e.what());
  }
}

Target parse_target_file(const std::string& path) { return parse_target_text(detail::read_file(path), path); }

std::string format_target(const Target& target) {
  std::ostringstream os;
  os.precision(17);
  os << "dim = " << target.dim() << "\n";
  os << "intrinsic_dim = " << target.intrinsic_dim() << "\n";
  for (const auto& c : target.components()) {
    os << "\n[component]\nweight = " << c.weight << "\nmean = ";
    for (std::size_t j = 0; j < c.mean.size(); ++j) os << (j ? "," : "") << c.mean[j];
    os << "\nvar = ";
    for (std::size_t j = 0; j < c.var.size(); ++j) os << (j ? "," : "") << c.var[j];
    os << "\n";
  }
  return os.str();
}

}  // namespace rfsl
