#pragma once

// Byte-stable JSON rendering: sorted object keys, 2-space indent, and every
// floating-point value printed with exactly six decimals.

#include <cmath>
#include <cstdio>
#include <string>

#include <nlohmann/json.hpp>

namespace tmo3d::io {

inline void format_fixed(double v, std::string& out) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  std::string s(buf);
  if (s == "-0.000000") s = "0.000000";
  out += s;
}

inline std::string format_fixed(double v) {
  std::string out;
  format_fixed(v, out);
  return out;
}

namespace detail {

inline void dump_fixed(const nlohmann::json& j, std::string& out, int depth) {
  const auto indent = [&](int d) { out.append(static_cast<std::size_t>(2 * d), ' '); };
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {  // std::map: keys already sorted
        if (!first) out += ",\n";
        first = false;
        indent(depth + 1);
        out += nlohmann::json(it.key()).dump();
        out += ": ";
        dump_fixed(it.value(), out, depth + 1);
      }
      out += "\n";
      indent(depth);
      out += "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Short numeric arrays (points, boxes) stay on one line.
      bool flat = j.size() <= 16;
      for (const auto& e : j) flat = flat && e.is_number();
      if (flat) {
        out += "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out += ", ";
          dump_fixed(j[i], out, depth + 1);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        indent(depth + 1);
        dump_fixed(j[i], out, depth + 1);
      }
      out += "\n";
      indent(depth);
      out += "]";
      return;
    }
    case nlohmann::json::value_t::number_float:
      format_fixed(j.get<double>(), out);
      return;
    default:
      out += j.dump();
  }
}

}  // namespace detail

inline std::string dump_fixed(const nlohmann::json& j) {
  std::string out;
  detail::dump_fixed(j, out, 0);
  out += "\n";
  return out;
}

}  // namespace tmo3d::io
