#pragma once

// CSV and JSON serialization for datasets, boxes, solutions and reports.

#include "rosets/core.hpp"
#include "rosets/robust.hpp"
#include "rosets/validate.hpp"

#include <nlohmann/json.hpp>

#include <stdexcept>
#include <string>

namespace rosets::io {

using Json = nlohmann::ordered_json;

/// Malformed input; the message carries "path:line:".
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be opened, read or written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);

/// Header x1..xd,y; the last column is the label.
Dataset read_dataset_csv(const std::string& path);
std::string dataset_to_csv(const Dataset& data);
void write_dataset_csv(const std::string& path, const Dataset& data);

/// Header x1..xd; a trailing y column, if present, is ignored so training
/// files can double as query files.
QueryBatch read_queries_csv(const std::string& path);

/// Plain numeric rows, no header (e.g. a covariance matrix).
Matrix read_matrix_csv(const std::string& path);

Json vector_to_json(const Vector& v);
Vector vector_from_json(const Json& j, const std::string& what);

Json box_to_json(const std::string& method, const BoxUncertaintySet& box, const Json& diagnostics);
BoxUncertaintySet box_from_json(const Json& j);

Json solution_to_json(const RobustSolution& sol);
Json report_to_json(const GuaranteeReport& report);

}  // namespace rosets::io
