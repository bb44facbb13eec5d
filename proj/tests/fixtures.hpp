#pragma once

#include "mlat/model.hpp"

namespace mlat::testing {

inline Vec3 vec(const char* x, const char* y, const char* z) {
  return {mp::Value::parse(x), mp::Value::parse(y), mp::Value::parse(z)};
}

// Well-conditioned synthetic network, five stations around seven points
// (35 equations, 35 unknowns). `stations` keeps the first n stations.
inline NetworkConfig compact_network(int stations = 5) {
  NetworkConfig n;
  n.name = "compact";
  n.workspace_m = {4.0, 4.0, 3.0};
  n.stations = {
      {1, vec("0", "0", "0"), mp::Value::parse("0.02")},
      {2, vec("4", "0", "0"), mp::Value::parse("0.03")},
      {3, vec("1", "4", "0"), mp::Value::parse("0.05")},
      {4, vec("0", "2", "3"), mp::Value::parse("0.04")},
      {5, vec("4", "3", "3"), mp::Value::parse("0.01")},
  };
  n.stations.resize(static_cast<size_t>(stations));
  n.points = {
      {1, vec("1", "1", "1")},     {2, vec("3", "1", "2")},     {3, vec("2", "3", "1")},
      {4, vec("1", "2", "2.5")},   {5, vec("3", "2.5", "0.5")}, {6, vec("2", "1.5", "1.5")},
      {7, vec("2.5", "3.5", "2")},
  };
  return n;
}

}  // namespace mlat::testing
