#ifndef INTERLACE_IO_HPP_
#define INTERLACE_IO_HPP_

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "interlace/errors.hpp"
#include "interlace/lattice.hpp"
#include "interlace/potential.hpp"

namespace interlace {

using json = nlohmann::json;

/// Shortest text that reads back to the same double (17 significant digits).
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline json point_to_json(const LatticePoint &p) { return p.coords(); }

inline LatticePoint point_from_json(const json &j) {
  return LatticePoint(j.get<std::vector<std::int64_t>>());
}

inline json set_to_json(const PointSet &s) {
  json arr = json::array();
  for (const auto &p : s) arr.push_back(point_to_json(p));
  return arr;
}

inline PointSet set_from_json(int dim, const json &j) {
  std::vector<LatticePoint> pts;
  for (const auto &e : j) pts.push_back(point_from_json(e));
  return PointSet(dim, pts);
}

/// {dim, points, weights, capacity}
inline json to_json(const EquilibriumMeasure &eq) {
  return json{{"dim", eq.set.dim()},
              {"points", set_to_json(eq.set)},
              {"weights", eq.weights},
              {"capacity", eq.capacity}};
}

inline EquilibriumMeasure equilibrium_from_json(const json &j) {
  EquilibriumMeasure eq;
  try {
    const int dim = j.at("dim").get<int>();
    eq.set = set_from_json(dim, j.at("points"));
    eq.weights = j.at("weights").get<std::vector<double>>();
    eq.capacity = j.at("capacity").get<double>();
  } catch (const json::exception &e) {
    throw ConfigError(std::string("equilibrium JSON: ") + e.what());
  }
  if (eq.weights.size() != eq.set.size())
    throw ConfigError("equilibrium JSON: weights and points differ in length");
  return eq;
}

inline void write_text(const std::string &path, const std::string &text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path);
  os << text;
  if (!os) throw std::runtime_error("write failed for " + path);
}

}  // namespace interlace

#endif  // INTERLACE_IO_HPP_
