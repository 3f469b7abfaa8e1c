#pragma once

#include <iosfwd>
#include <string>

#include "rfsl/batch.hpp"

namespace rfsl {

// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

// Header x0,...,x{d-1}; one sample per row.
void write_samples_csv(std::ostream& out, const Matrix& data);
void write_samples_csv(const std::string& path, const Matrix& data);
// Header step,t,x0,...,x{d-1}; frames in step order, samples in row order.
void write_trajectory_csv(std::ostream& out, const SampleBatch& batch);
void write_trajectory_csv(const std::string& path, const SampleBatch& batch);

// Reads a sample CSV (x columns only). Throws ParseError on malformed input.
Matrix read_samples_csv(const std::string& path);
Matrix parse_samples_csv(const std::string& text, const std::string& source = "<string>");

}  // namespace rfsl
