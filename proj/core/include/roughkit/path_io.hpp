#pragma once

#include <iosfwd>
#include <string>

#include "roughkit/paths.hpp"

namespace roughkit {

/// Decimal form with 17 significant digits; parses back to the same double.
std::string format_double(double x);

/// Reads `t,x1,...,xd` CSV. Blank lines are skipped; errors carry 1-based line numbers.
SampledPath read_path_csv(std::istream& in);
SampledPath read_path_csv_file(const std::string& filename);

void write_path_csv(std::ostream& out, const SampledPath& path);
void write_path_csv_file(const std::string& filename, const SampledPath& path);

/// JSON array of records `{"t": ..., "x1": ..., ...}`.
std::string path_to_json(const SampledPath& path);
SampledPath path_from_json(const std::string& text);

}  // namespace roughkit
