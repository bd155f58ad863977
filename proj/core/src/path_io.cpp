#include "roughkit/path_io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include "json.hpp"

#include "roughkit/errors.hpp"

namespace roughkit {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    auto first = field.find_first_not_of(" \t\r");
    auto last = field.find_last_not_of(" \t\r");
    out.push_back(first == std::string::npos ? std::string() : field.substr(first, last - first + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& field, std::size_t line) {
  if (field.empty()) throw ParseError("empty numeric field", line);
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(field.c_str(), &end);
  if (end != field.c_str() + field.size()) throw ParseError("not a number: '" + field + "'", line);
  if (errno == ERANGE && std::abs(v) > 1.0) throw ParseError("number out of range: '" + field + "'", line);
  return v;
}

bool blank(const std::string& line) { return line.find_first_not_of(" \t\r") == std::string::npos; }

}  // namespace

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

SampledPath read_path_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  bool have_header = false;
  std::vector<double> times;
  std::vector<Vector> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    auto fields = split_fields(line);
    if (!have_header) {
      if (fields.size() < 2 || fields[0] != "t") throw ParseError("expected header 't,x1,...,xd'", line_no);
      for (std::size_t k = 1; k < fields.size(); ++k)
        if (fields[k] != "x" + std::to_string(k)) throw ParseError("bad header column '" + fields[k] + "'", line_no);
      dim = fields.size() - 1;
      have_header = true;
      continue;
    }
    if (fields.size() != dim + 1)
      throw ParseError("expected " + std::to_string(dim + 1) + " fields, found " + std::to_string(fields.size()),
                       line_no);
    double t = parse_number(fields[0], line_no);
    Vector v(static_cast<Eigen::Index>(dim));
    for (std::size_t k = 0; k < dim; ++k) v[static_cast<Eigen::Index>(k)] = parse_number(fields[k + 1], line_no);
    if (!times.empty() && !(t > times.back())) throw ParseError("times must strictly increase", line_no);
    if (times.empty() && t != 0.0) throw ParseError("first time must be 0", line_no);
    times.push_back(t);
    values.push_back(std::move(v));
  }
  if (!have_header) throw ParseError("missing header", line_no + 1);
  if (times.empty()) throw ParseError("no samples", line_no + 1);
  return SampledPath(std::move(times), std::move(values));
}

SampledPath read_path_csv_file(const std::string& filename) {
  std::ifstream in(filename);
  if (!in) throw ArgumentError("cannot open " + filename);
  return read_path_csv(in);
}

void write_path_csv(std::ostream& out, const SampledPath& path) {
  out << 't';
  for (std::size_t k = 1; k <= path.dim(); ++k) out << ",x" << k;
  out << '\n';
  for (std::size_t i = 0; i < path.size(); ++i) {
    out << format_double(path.time(i));
    for (Eigen::Index k = 0; k < path.value(i).size(); ++k) out << ',' << format_double(path.value(i)[k]);
    out << '\n';
  }
}

void write_path_csv_file(const std::string& filename, const SampledPath& path) {
  std::ofstream out(filename);
  if (!out) throw ArgumentError("cannot write " + filename);
  write_path_csv(out, path);
}

std::string path_to_json(const SampledPath& path) {
  nlohmann::ordered_json records = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < path.size(); ++i) {
    nlohmann::ordered_json rec;
    rec["t"] = path.time(i);
    for (std::size_t k = 0; k < path.dim(); ++k)
      rec["x" + std::to_string(k + 1)] = path.value(i)[static_cast<Eigen::Index>(k)];
    records.push_back(std::move(rec));
  }
  return records.dump();
}

SampledPath path_from_json(const std::string& text) try {
  auto doc = nlohmann::json::parse(text);
  if (!doc.is_array() || doc.empty()) throw ParseError("path JSON must be a non-empty array of records");
  std::size_t dim = doc[0].size() - 1;
  std::vector<double> times;
  std::vector<Vector> values;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& rec = doc[i];
    if (!rec.is_object() || !rec.contains("t") || rec.size() != dim + 1)
      throw ParseError("record " + std::to_string(i) + " malformed");
    times.push_back(rec["t"].get<double>());
    Vector v(static_cast<Eigen::Index>(dim));
    for (std::size_t k = 0; k < dim; ++k) {
      auto key = "x" + std::to_string(k + 1);
      if (!rec.contains(key)) throw ParseError("record " + std::to_string(i) + " lacks " + key);
      v[static_cast<Eigen::Index>(k)] = rec[key].get<double>();
    }
    values.push_back(std::move(v));
  }
  return SampledPath(std::move(times), std::move(values));
} catch (const nlohmann::json::exception& e) {
  throw ParseError(e.what());
}

}  // namespace roughkit
