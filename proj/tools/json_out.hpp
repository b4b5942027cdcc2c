#pragma once

// Deterministic JSON text: doubles at 17 significant digits, non-finite values as null.

#include <cmath>
#include <cstdio>
#include <string>

#include <json.hpp>

namespace ckn::cli {

using Json = nlohmann::ordered_json;

namespace detail {

inline void newline(std::string& out, int indent, int depth) {
  if (indent < 0) return;
  out += '\n';
  out.append(static_cast<std::size_t>(indent * depth), ' ');
}

inline void emit(const Json& j, std::string& out, int indent, int depth) {
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (const auto& [k, v] : j.items()) {
        if (!first) out += ',';
        first = false;
        newline(out, indent, depth + 1);
        out += Json(k).dump();
        out += indent < 0 ? ":" : ": ";
        emit(v, out, indent, depth + 1);
      }
      newline(out, indent, depth);
      out += '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += '[';
      for (std::size_t k = 0; k < j.size(); ++k) {
        if (k) out += ',';
        newline(out, indent, depth + 1);
        emit(j[k], out, indent, depth + 1);
      }
      newline(out, indent, depth);
      out += ']';
      return;
    }
    case Json::value_t::number_float: {
      const double x = j.get<double>();
      if (!std::isfinite(x)) {
        out += "null";
        return;
      }
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", x);
      out += buf;
      return;
    }
    default: out += j.dump();
  }
}

}  // namespace detail

/// indent < 0 gives a single line.
inline std::string to_text(const Json& j, int indent) {
  std::string out;
  detail::emit(j, out, indent, 0);
  return out;
}

}  // namespace ckn::cli
