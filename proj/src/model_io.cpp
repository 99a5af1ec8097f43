#include "consensus_mesh/model_io.h"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "consensus_mesh/errors.h"

namespace consensus {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& what) { throw FormatError(what); }

const json& field(const json& j, const char* name) {
  if (!j.is_object() || !j.contains(name)) bad(std::string("missing field \"") + name + "\"");
  return j.at(name);
}

double number(const json& j, const char* what) {
  if (!j.is_number()) bad(std::string(what) + " must be a number");
  return j.get<double>();
}

Eigen::VectorXd vector_from(const json& j, const char* what, Eigen::Index expected = -1) {
  if (!j.is_array()) bad(std::string(what) + " must be an array");
  if (expected >= 0 && static_cast<Eigen::Index>(j.size()) != expected)
    bad(std::string(what) + " must have " + std::to_string(expected) + " entries");
  Eigen::VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v(i) = number(j[i], what);
  return v;
}

json vector_to(const Eigen::Ref<const Eigen::VectorXd>& v) {
  json j = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v(i));
  return j;
}

template <class Matrix>
json matrix_to(const Matrix& m) {
  json j = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    j.push_back(std::move(row));
  }
  return j;
}

Eigen::MatrixXd matrix_from(const json& j, const char* what, Eigen::Index cols = -1) {
  if (!j.is_array()) bad(std::string(what) + " must be an array of rows");
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  if (rows > 0 && cols < 0) {
    if (!j[0].is_array()) bad(std::string(what) + " must be an array of rows");
    cols = static_cast<Eigen::Index>(j[0].size());
  }
  Eigen::MatrixXd m(rows, std::max<Eigen::Index>(cols, 0));
  for (Eigen::Index r = 0; r < rows; ++r) m.row(r) = vector_from(j[r], what, cols).transpose();
  return m;
}

std::vector<int> index_list(const json& j, const char* what) {
  if (!j.is_array()) bad(std::string(what) + " must be an array");
  std::vector<int> out;
  for (const auto& e : j) {
    if (!e.is_number_integer()) bad(std::string(what) + " must hold integers");
    out.push_back(e.get<int>());
  }
  return out;
}

void check_version(const json& j) {
  const json& v = field(j, "format_version");
  if (!v.is_number_integer() || v.get<int>() != kFormatVersion)
    bad("unsupported format_version (expected " + std::to_string(kFormatVersion) + ")");
}

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    bad(std::string("malformed JSON: ") + e.what());
  }
}

json camera_to(const CameraParams& cam) {
  return json{{"rot", vector_to(cam.rot)}, {"t", vector_to(cam.t)}, {"s", cam.s}};
}

CameraParams camera_from(const json& j) {
  CameraParams cam;
  cam.rot = vector_from(field(j, "rot"), "camera.rot", 3);
  cam.t = vector_from(field(j, "t"), "camera.t", 2);
  cam.s = number(field(j, "s"), "camera.s");
  try {
    validate(cam);
  } catch (const InvalidArgument& e) {
    bad(e.what());
  }
  return cam;
}

}  // namespace

std::string read_text_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os << text;
  if (!os) throw IoError("failed writing " + path);
}

std::string model_to_json(const BodyModel& model) {
  const int K = model.num_vertices();
  json j;
  j["format_version"] = kFormatVersion;
  j["template"] = matrix_to(model.template_vertices);
  json basis = json::array();
  for (int k = 0; k < K; ++k) {
    json vertex = json::array();
    for (int c = 0; c < 3; ++c) vertex.push_back(vector_to(model.shape_basis.row(3 * k + c).transpose()));
    basis.push_back(std::move(vertex));
  }
  j["shape_basis"] = std::move(basis);
  j["faces"] = matrix_to(model.faces);
  j["parents"] = model.parents;
  j["joint_names"] = model.joint_names;
  j["joint_regressor_rest"] = matrix_to(model.joint_regressor_rest);
  j["skin_weights"] = matrix_to(model.skin_weights);
  j["pose_regressor"] = matrix_to(model.pose_regressor);
  j["symmetry"] = model.symmetry.groups;
  json parts = json::array();
  for (int l = 0; l < model.parts.size(); ++l)
    parts.push_back({{"name", l < static_cast<int>(model.parts.names.size()) ? model.parts.names[l] : ""},
                     {"vertices", model.parts.vertices[l]}});
  j["parts"] = std::move(parts);
  return j.dump();
}

BodyModel model_from_json(const std::string& text) {
  const json j = parse(text);
  check_version(j);
  BodyModel m;
  Eigen::MatrixXd tmpl = matrix_from(field(j, "template"), "template", 3);
  m.template_vertices = tmpl;
  const int K = m.num_vertices();
  const json& basis = field(j, "shape_basis");
  if (!basis.is_array() || static_cast<int>(basis.size()) != K) bad("shape_basis must be K x 3 x 10");
  m.shape_basis.resize(3 * K, kShapeDim);
  for (int k = 0; k < K; ++k) {
    if (!basis[k].is_array() || basis[k].size() != 3) bad("shape_basis must be K x 3 x 10");
    for (int c = 0; c < 3; ++c) m.shape_basis.row(3 * k + c) = vector_from(basis[k][c], "shape_basis", kShapeDim);
  }
  const json& faces = field(j, "faces");
  if (!faces.is_array()) bad("faces must be an array");
  m.faces.resize(static_cast<Eigen::Index>(faces.size()), 3);
  for (size_t f = 0; f < faces.size(); ++f) {
    std::vector<int> idx = index_list(faces[f], "faces");
    if (idx.size() != 3) bad("faces must be triangles");
    for (int c = 0; c < 3; ++c) m.faces(static_cast<Eigen::Index>(f), c) = idx[c];
  }
  m.parents = index_list(field(j, "parents"), "parents");
  if (m.parents.empty()) bad("parents must not be empty");
  if (j.contains("joint_names")) {
    for (const auto& n : j.at("joint_names")) {
      if (!n.is_string()) bad("joint_names must be strings");
      m.joint_names.push_back(n.get<std::string>());
    }
  }
  m.joint_regressor_rest = matrix_from(field(j, "joint_regressor_rest"), "joint_regressor_rest", K);
  m.skin_weights = matrix_from(field(j, "skin_weights"), "skin_weights", static_cast<Eigen::Index>(m.parents.size()));
  m.pose_regressor = matrix_from(field(j, "pose_regressor"), "pose_regressor", K);
  for (const auto& g : field(j, "symmetry")) m.symmetry.groups.push_back(index_list(g, "symmetry"));
  for (const auto& p : field(j, "parts")) {
    const json& name = field(p, "name");
    if (!name.is_string()) bad("part name must be a string");
    m.parts.names.push_back(name.get<std::string>());
    m.parts.vertices.push_back(index_list(field(p, "vertices"), "part vertices"));
  }
  validate(m);
  m.symmetry.rebuild_index(K);
  m.parts.rebuild_index(K);
  return m;
}

void save_model(const std::string& path, const BodyModel& model) { write_text_file(path, model_to_json(model)); }

BodyModel load_model(const std::string& path) {
  try {
    return model_from_json(read_text_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

std::string params_to_json(const ViewParams& params) {
  json j;
  j["theta"] = vector_to(params.theta);
  j["beta"] = vector_to(params.beta);
  j["camera"] = camera_to(params.camera);
  if (params.phi) j["phi"] = vector_to(*params.phi);
  return j.dump(2);
}

ViewParams params_from_json(const std::string& text) {
  const json j = parse(text);
  ViewParams p;
  p.theta = vector_from(field(j, "theta"), "theta");
  p.beta = vector_from(field(j, "beta"), "beta", kShapeDim);
  p.camera = camera_from(field(j, "camera"));
  if (j.contains("phi")) p.phi = LatentVector(vector_from(j.at("phi"), "phi", kLatentDim));
  if (!p.theta.allFinite() || !p.beta.allFinite()) bad("parameters must be finite");
  return p;
}

void save_params(const std::string& path, const ViewParams& params) {
  write_text_file(path, params_to_json(params));
}

ViewParams load_params(const std::string& path) {
  try {
    return params_from_json(read_text_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

void save_mocap(const std::string& path, const std::vector<Eigen::VectorXd>& poses) {
  json j = json::array();
  for (const auto& p : poses) j.push_back(vector_to(p));
  write_text_file(path, j.dump());
}

std::vector<Eigen::VectorXd> load_mocap(const std::string& path) {
  const json j = parse(read_text_file(path));
  if (!j.is_array()) throw FormatError(path + ": MoCap file must be a JSON array of poses");
  std::vector<Eigen::VectorXd> poses;
  for (const auto& p : j) poses.push_back(vector_from(p, "pose"));
  for (const auto& p : poses)
    if (p.size() != poses.front().size()) throw FormatError(path + ": poses differ in length");
  return poses;
}

void save_colors(const std::string& path, const Colors& colors) {
  json j;
  j["colors"] = matrix_to(colors);
  write_text_file(path, j.dump());
}

Colors load_colors(const std::string& path) {
  const json j = parse(read_text_file(path));
  return matrix_from(field(j, "colors"), "colors", 3);
}

}  // namespace consensus
