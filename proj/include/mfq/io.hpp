#pragma once

#include "mfq/boundary.hpp"
#include "mfq/level_set.hpp"
#include "mfq/sampling.hpp"
#include "mfq/types.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace mfq::io {

/// 17 significant digits.
inline std::string real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::vector<std::string> split(const std::string &line, char sep = ',') {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

inline double parse_real(const std::string &s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception &) {
    throw ConfigError("not a number: '" + s + "'");
  }
  if (used != s.size()) throw ConfigError("not a number: '" + s + "'");
  return v;
}

/// Header `x,y,z,nx,ny,nz[,kappa]`.
inline void write_point_cloud(std::ostream &os, const PointCloud &cloud) {
  bool kappa = !cloud.points.empty();
  for (const SurfacePoint &p : cloud.points) kappa = kappa && p.curvature_sum.has_value();
  os << "x,y,z,nx,ny,nz" << (kappa ? ",kappa" : "") << '\n';
  for (const SurfacePoint &p : cloud.points) {
    os << real(p.position.x()) << ',' << real(p.position.y()) << ',' << real(p.position.z()) << ','
       << real(p.normal.x()) << ',' << real(p.normal.y()) << ',' << real(p.normal.z());
    if (kappa) os << ',' << real(*p.curvature_sum);
    os << '\n';
  }
}

inline PointCloud read_point_cloud(std::istream &is) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("empty point-cloud file");
  const auto header = split(line);
  const bool kappa = header.size() == 7 && header[6] == "kappa";
  const std::vector<std::string> want{"x", "y", "z", "nx", "ny", "nz"};
  if (!(header.size() == 6 || kappa) || !std::equal(want.begin(), want.end(), header.begin()))
    throw ConfigError("point-cloud header must be x,y,z,nx,ny,nz[,kappa]");
  PointCloud cloud;
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size())
      throw ConfigError("point-cloud row " + std::to_string(row) + " has the wrong column count");
    SurfacePoint p;
    for (int a = 0; a < 3; ++a) {
      p.position[a] = parse_real(cells[a]);
      p.normal[a] = parse_real(cells[3 + a]);
    }
    const double nn = p.normal.norm();
    if (!(nn > 0.0)) throw ConfigError("zero normal in point-cloud row " + std::to_string(row));
    p.normal /= nn;
    if (kappa) p.curvature_sum = parse_real(cells[6]);
    cloud.points.push_back(p);
  }
  cloud.n_interior = cloud.points.size();
  return cloud;
}

/// Header `x,y,z,cx,cy,cz,weight,piece_id`.
inline void write_boundary(std::ostream &os, const BoundaryQuadrature &q) {
  os << "x,y,z,cx,cy,cz,weight,piece_id\n";
  for (std::size_t i = 0; i < q.size(); ++i) {
    const Vec3 &x = q.nodes[i], &c = q.conormals[i];
    os << real(x.x()) << ',' << real(x.y()) << ',' << real(x.z()) << ',' << real(c.x()) << ','
       << real(c.y()) << ',' << real(c.z()) << ',' << real(q.weights[i]) << ','
       << (q.piece_ids.empty() ? 0 : q.piece_ids[i]) << '\n';
  }
}

/// Header `x,y,z,weight`.
inline void write_weights(std::ostream &os, const PointCloud &cloud, const Eigen::VectorXd &w) {
  os << "x,y,z,weight\n";
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3 &x = cloud.points[i].position;
    os << real(x.x()) << ',' << real(x.y()) << ',' << real(x.z()) << ','
       << real(w(static_cast<Eigen::Index>(i))) << '\n';
  }
}

template <class Fn>
void write_file(const std::string &path, Fn &&fn) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot open '" + path + "' for writing");
  fn(os);
  if (!os) throw Error("write to '" + path + "' failed");
}

inline PointCloud read_point_cloud(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open '" + path + "'");
  return read_point_cloud(is);
}

} // namespace mfq::io
