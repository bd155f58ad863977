#include "roughkit_cli/json_out.hpp"

#include <cmath>

#include "roughkit/path_io.hpp"

namespace roughkit::cli {

namespace {

void emit(const Json& v, std::string& out) {
  switch (v.type()) {
    case Json::value_t::object: {
      out += '{';
      bool first = true;
      for (const auto& [key, item] : v.items()) {
        if (!first) out += ',';
        first = false;
        out += Json(key).dump();
        out += ':';
        emit(item, out);
      }
      out += '}';
      break;
    }
    case Json::value_t::array: {
      out += '[';
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ',';
        emit(v[i], out);
      }
      out += ']';
      break;
    }
    case Json::value_t::number_float: {
      double x = v.get<double>();
      out += std::isfinite(x) ? format_double(x) : "null";
      break;
    }
    default:
      out += v.dump();
  }
}

}  // namespace

std::string dump17(const Json& doc) {
  std::string out;
  emit(doc, out);
  return out;
}

}  // namespace roughkit::cli
