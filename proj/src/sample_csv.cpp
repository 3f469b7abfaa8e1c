#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>
#include <vector>

#include "kv_parse.hpp"
#include "rfsl/error.hpp"
#include "rfsl/io.hpp"

namespace rfsl {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

void write_header(std::ostream& out, std::size_t d, bool with_step) {
  if (with_step) out << "step,t,";
  for (std::size_t j = 0; j < d; ++j) out << (j ? "," : "") << 'x' << j;
  out << '\n';
}

void write_row(std::ostream& out, std::span<const double> row) {
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (j) out << ',';
    out << format_double(row[j]);
  }
  out << '\n';
}

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  return f;
}

}  // namespace

void write_samples_csv(std::ostream& out, const Matrix& data) {
  write_header(out, data.cols(), false);
  for (std::size_t i = 0; i < data.rows(); ++i) write_row(out, data.row(i));
}

void write_samples_csv(const std::string& path, const Matrix& data) {
  auto f = open_out(path);
  write_samples_csv(f, data);
  if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

void write_trajectory_csv(std::ostream& out, const SampleBatch& batch) {
  write_header(out, batch.dim(), true);
  for (const auto& frame : batch.trajectory) {
    const std::string prefix = std::to_string(frame.step) + "," + format_double(frame.t) + ",";
    for (std::size_t i = 0; i < frame.states.rows(); ++i) {
      out << prefix;
      write_row(out, frame.states.row(i));
    }
  }
}

void write_trajectory_csv(const std::string& path, const SampleBatch& batch) {
  auto f = open_out(path);
  write_trajectory_csv(f, batch);
  if (!f) throw std::runtime_error("write to '" + path + "' failed");
}

Matrix parse_samples_csv(const std::string& text, const std::string& source) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0, d = 0;
  std::vector<double> values;
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = detail::split_list(line);
    if (d == 0) {
      for (std::size_t j = 0; j < fields.size(); ++j)
        if (fields[j] != "x" + std::to_string(j))
          throw ParseError(source, lineno, fields[j], "expected header x0,...,x{d-1}");
      d = fields.size();
      if (d == 0) throw ParseError(source, lineno, "", "empty header");
      continue;
    }
    if (fields.size() != d)
      throw ParseError(source, lineno, "", "expected " + std::to_string(d) + " fields, got " +
                                               std::to_string(fields.size()));
    for (std::size_t j = 0; j < d; ++j) {
      const auto& f = fields[j];
      double v = 0.0;
      const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
      if (res.ec != std::errc() || res.ptr != f.data() + f.size())
        throw ParseError(source, lineno, "x" + std::to_string(j), "not a number: '" + f + "'");
      values.push_back(v);
    }
    ++rows;
  }
  if (d == 0) throw ParseError(source, lineno, "", "missing header");
  Matrix m(rows, d);
  std::copy(values.begin(), values.end(), m.values().begin());
  return m;
}

Matrix read_samples_csv(const std::string& path) { return parse_samples_csv(detail::read_file(path), path); }

}  // namespace rfsl
