#include "consensus_mesh/mesh_io.h"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "consensus_mesh/errors.h"
#include "consensus_mesh/model_io.h"

namespace consensus {

namespace {

int to_byte(double v) {
  if (!(v > 0.0)) return 0;
  if (v >= 1.0) return 255;
  return static_cast<int>(std::lround(v * 255.0));
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string mesh_to_ply(const Vertices& V, const Faces& faces, const Colors& colors) {
  if (colors.rows() != V.rows()) throw InvalidArgument("PLY export: one color per vertex is required");
  std::ostringstream os;
  os << "ply\nformat ascii 1.0\n"
     << "element vertex " << V.rows() << "\n"
     << "property double x\nproperty double y\nproperty double z\n"
     << "property uchar red\nproperty uchar green\nproperty uchar blue\n"
     << "element face " << faces.rows() << "\n"
     << "property list uchar int vertex_indices\nend_header\n";
  for (Eigen::Index k = 0; k < V.rows(); ++k)
    os << format_double(V(k, 0)) << ' ' << format_double(V(k, 1)) << ' ' << format_double(V(k, 2)) << ' '
       << to_byte(colors(k, 0)) << ' ' << to_byte(colors(k, 1)) << ' ' << to_byte(colors(k, 2)) << '\n';
  for (Eigen::Index f = 0; f < faces.rows(); ++f)
    os << "3 " << faces(f, 0) << ' ' << faces(f, 1) << ' ' << faces(f, 2) << '\n';
  return os.str();
}

void write_ply(const std::string& path, const Vertices& V, const Faces& faces, const Colors& colors) {
  write_text_file(path, mesh_to_ply(V, faces, colors));
}

void write_obj(const std::string& path, const Vertices& V, const Faces& faces) {
  std::ostringstream os;
  for (Eigen::Index k = 0; k < V.rows(); ++k)
    os << "v " << format_double(V(k, 0)) << ' ' << format_double(V(k, 1)) << ' ' << format_double(V(k, 2)) << '\n';
  for (Eigen::Index f = 0; f < faces.rows(); ++f)
    os << "f " << faces(f, 0) + 1 << ' ' << faces(f, 1) + 1 << ' ' << faces(f, 2) + 1 << '\n';
  write_text_file(path, os.str());
}

}  // namespace consensus
