#pragma once

/**
 * @brief Plain-text field snapshots
 *
 * Layout: one header line
 *   # d=<d> Nz=<line nodes> Z=<half length or line end> sphere=<descriptor> params=<json>
 * followed by one value per line (%.17g), row-major in (line node, sphere node).
 */

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "ckn/discretization/field.hpp"
#include "ckn/errors.hpp"

namespace ckn {

struct Snapshot {
  int d = 0;
  std::size_t nz = 0;
  double z = 0.0;
  std::string sphere;
  std::string params = "{}";
  std::vector<double> values;
};

inline void write_snapshot(std::ostream& os, const Snapshot& s) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", s.z);
  os << "# d=" << s.d << " Nz=" << s.nz << " Z=" << buf << " sphere=" << s.sphere << " params=" << s.params << '\n';
  for (double v : s.values) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << buf << '\n';
  }
}

inline Snapshot read_snapshot(std::istream& is) {
  Snapshot s;
  std::string header;
  if (!std::getline(is, header) || header.rfind("# ", 0) != 0) throw DomainError("snapshot: missing header line");
  std::istringstream hs(header.substr(2));
  std::string tok;
  while (hs >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw DomainError("snapshot: malformed header token '" + tok + "'");
    const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
    if (key == "d") s.d = std::stoi(val);
    else if (key == "Nz") s.nz = std::stoul(val);
    else if (key == "Z") s.z = std::stod(val);
    else if (key == "sphere") s.sphere = val;
    else if (key == "params") {
      std::string rest;
      std::getline(hs, rest);
      s.params = val + rest;
      break;
    }
  }
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    s.values.push_back(std::stod(line));
  }
  return s;
}

/// Snapshot of a cylinder field; Z is the half length.
inline Snapshot to_snapshot(const CylinderField& f, const std::string& params = "{}") {
  const auto& g = f.grid();
  return {g.dim(), g.line.size(), g.half_length(), g.sphere.descriptor(), params, f.data()};
}

/// Rebuild the sphere grid from its descriptor.
inline SphereGrid sphere_from_descriptor(const std::string& desc) {
  const auto colon = desc.find(':');
  if (colon == std::string::npos) throw DomainError("snapshot: bad sphere descriptor '" + desc + "'");
  const std::string kind = desc.substr(0, colon), rest = desc.substr(colon + 1);
  if (kind == "point") return SphereGrid::point(std::stoi(rest));
  if (kind == "circle") return SphereGrid::circle(std::stoul(rest));
  if (kind == "gl") {
    const auto x = rest.find('x');
    if (x == std::string::npos) throw DomainError("snapshot: bad sphere descriptor '" + desc + "'");
    return SphereGrid::gauss_legendre(std::stoul(rest.substr(0, x)), std::stoul(rest.substr(x + 1)));
  }
  throw DomainError("snapshot: unknown sphere kind '" + kind + "'");
}

inline CylinderField cylinder_from_snapshot(const Snapshot& s) {
  auto g = CylinderGrid::make(s.z, s.nz, sphere_from_descriptor(s.sphere));
  if (g->dim() != s.d) throw DomainError("snapshot: dimension does not match sphere descriptor");
  return CylinderField(g, s.values);
}

}  // namespace ckn
