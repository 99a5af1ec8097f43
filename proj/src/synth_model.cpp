#include "consensus_mesh/synth_model.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <numbers>

#include <Eigen/Geometry>

#include "consensus_mesh/errors.h"
#include "consensus_mesh/rotation.h"

namespace consensus {

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  double u1 = uniform();
  double u2 = uniform();
  return std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Eigen::Vector3d front_view_rotation() { return {std::numbers::pi, 0.0, 0.0}; }

namespace {

constexpr double kPi = std::numbers::pi;

// Piecewise-linear function of the axial coordinate, clamped at the ends.
struct Profile {
  std::vector<std::pair<double, double>> knots;
  double operator()(double s) const {
    if (s <= knots.front().first) return knots.front().second;
    if (s >= knots.back().first) return knots.back().second;
    for (size_t i = 1; i < knots.size(); ++i)
      if (s <= knots[i].first) {
        double t = (s - knots[i - 1].first) / (knots[i].first - knots[i - 1].first);
        return (1.0 - t) * knots[i - 1].second + t * knots[i].second;
      }
    return knots.back().second;
  }
  Profile scaled(double s_scale, double value_scale) const {
    Profile p;
    for (auto [s, v] : knots) p.knots.emplace_back(s * s_scale, v * value_scale);
    return p;
  }
};

// Samples at angles (i + 1/2) 2 pi / n. Only the first quadrant is evaluated;
// the rest are sign flips so that mirrored samples agree bit for bit.
void circle_table(int n, std::vector<double>& c, std::vector<double>& s) {
  c.assign(n, 0.0);
  s.assign(n, 0.0);
  const int q = n / 4;
  for (int i = 0; i < q; ++i) {
    double a = (i + 0.5) * 2.0 * kPi / n;
    double ca = std::cos(a), sa = std::sin(a);
    c[i] = ca, s[i] = sa;
    c[n / 2 - 1 - i] = -ca, s[n / 2 - 1 - i] = sa;
    c[n / 2 + i] = -ca, s[n / 2 + i] = -sa;
    c[n - 1 - i] = ca, s[n - 1 - i] = -sa;
  }
}

int ring_size(double base, int k_target) {
  int n = 4 * static_cast<int>(std::lround(base * std::sqrt(k_target / 600.0) / 4.0));
  return std::max(4, n);
}

// Required stations plus evenly spaced fill with spacing close to d.
std::vector<double> fill_stations(const std::vector<double>& stations, double d) {
  std::vector<double> out{stations.front()};
  for (size_t i = 1; i < stations.size(); ++i) {
    double gap = stations[i] - stations[i - 1];
    int segs = std::max(1, static_cast<int>(std::lround(gap / d)));
    for (int k = 1; k < segs; ++k) out.push_back(stations[i - 1] + gap * k / segs);
    out.push_back(stations[i]);
  }
  return out;
}

enum class TubeKind { Torso, Head, LeftArm, RightArm, LeftLeg, RightLeg };

struct TubeSpec {
  TubeKind kind;
  std::vector<double> stations;
  std::function<Eigen::Vector3d(double)> center;
  Eigen::Vector3d u, w;  // cross-section axes
  Profile ru, rw;
  int n = 8;
  bool mirror_x = false;
};

struct Ring {
  std::vector<int> ids;
  double s = 0.0;
};

enum MirrorCode { kSame = 0, kFlipX = 1, kFlipZ = 2 };

struct VertexInfo {
  TubeKind kind;
  double s = 0.0;
  Eigen::Vector3d center;
};

struct Builder {
  std::vector<Eigen::Vector3d> verts;
  std::vector<VertexInfo> info;
  std::vector<Eigen::Vector3i> faces;

  void add_face(int a, int b, int c, const Eigen::Vector3d& ref) {
    Eigen::Vector3d n = (verts[b] - verts[a]).cross(verts[c] - verts[a]);
    Eigen::Vector3d centroid = (verts[a] + verts[b] + verts[c]) / 3.0;
    if (n.dot(centroid - ref) < 0.0) std::swap(b, c);
    faces.emplace_back(a, b, c);
  }

  std::vector<Ring> add_tube(const TubeSpec& spec, double d) {
    std::vector<double> cs, sn;
    circle_table(spec.n, cs, sn);
    std::vector<double> main = fill_stations(spec.stations, d);
    const double s0 = main.front(), s1 = main.back();
    const double dir = s1 > s0 ? 1.0 : -1.0;
    struct Station {
      double s, ru, rw;
    };
    std::vector<Station> all;
    all.push_back({s0 - dir * 0.5 * spec.ru(s0), 0.6 * spec.ru(s0), 0.6 * spec.rw(s0)});
    for (double s : main) all.push_back({s, spec.ru(s), spec.rw(s)});
    all.push_back({s1 + dir * 0.5 * spec.ru(s1), 0.6 * spec.ru(s1), 0.6 * spec.rw(s1)});

    auto place = [&](const Eigen::Vector3d& p) {
      return spec.mirror_x ? Eigen::Vector3d(-p.x(), p.y(), p.z()) : p;
    };
    std::vector<Ring> rings;
    for (const auto& st : all) {
      Ring ring;
      ring.s = st.s;
      Eigen::Vector3d c = spec.center(st.s);
      for (int i = 0; i < spec.n; ++i) {
        Eigen::Vector3d p = c + st.ru * cs[i] * spec.u + st.rw * sn[i] * spec.w;
        ring.ids.push_back(static_cast<int>(verts.size()));
        verts.push_back(place(p));
        info.push_back({spec.kind, st.s, place(c)});
      }
      rings.push_back(std::move(ring));
    }
    const int n = spec.n;
    for (size_t r = 0; r + 1 < rings.size(); ++r) {
      Eigen::Vector3d ref = place(spec.center(0.5 * (rings[r].s + rings[r + 1].s)));
      const auto& A = rings[r].ids;
      const auto& B = rings[r + 1].ids;
      for (int i = 0; i < n; ++i) {
        int j = (i + 1) % n;
        add_face(A[i], A[j], B[j], ref);
        add_face(A[i], B[j], B[i], ref);
      }
    }
    // Fan caps over the outermost rings, oriented away from the adjacent main ring.
    for (int end = 0; end < 2; ++end) {
      const Ring& cap = end == 0 ? rings.front() : rings.back();
      Eigen::Vector3d ref = place(spec.center(end == 0 ? s0 : s1));
      for (int i = 1; i + 1 < n; ++i) add_face(cap.ids[0], cap.ids[i], cap.ids[i + 1], ref);
    }
    return rings;
  }
};

int count_vertices(const std::vector<TubeSpec>& specs, double d) {
  int total = 0;
  for (const auto& spec : specs) total += spec.n * (static_cast<int>(fill_stations(spec.stations, d).size()) + 2);
  return total;
}

double smoothstep(double lo, double hi, double x) {
  double t = std::clamp((x - lo) / (hi - lo), 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

// Blend weights along a chain of pivots: nodes[0] drives the tube before the
// first pivot, nodes[i] pivots at pos[i] (pos[0] unused). Each pivot blends
// linearly over [pos - h, pos + h].
void chain_weights(double s, const std::vector<int>& nodes, const std::vector<double>& pos, double half_width,
                   Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row) {
  const int m = static_cast<int>(nodes.size()) - 1;
  std::vector<double> t(m + 2, 0.0);
  for (int i = 1; i <= m; ++i) {
    double h = half_width;
    if (i + 1 <= m) h = std::min(h, 0.45 * (pos[i + 1] - pos[i]));
    if (i - 1 >= 1) h = std::min(h, 0.45 * (pos[i] - pos[i - 1]));
    t[i] = std::clamp((s - (pos[i] - h)) / (2.0 * h), 0.0, 1.0);
  }
  t[0] = 1.0;
  for (int i = 0; i <= m; ++i) row(nodes[i]) += t[i] - t[i + 1];
}

struct Proportions {
  double torso = 1.0, arm = 1.0, leg = 1.0, width = 1.0, girth = 1.0;
};

}  // namespace

BodyModel synth_model(std::uint64_t seed, int k_target, int joints) {
  if (k_target < 100) throw InvalidArgument("synth_model: K_target must be at least 100");
  if (joints < 15) throw InvalidArgument("synth_model: at least 15 joints are required");
  const int extra = joints - 15;

  Rng rng(seed);
  Proportions pr;
  pr.torso = rng.uniform(0.97, 1.03);
  pr.arm = rng.uniform(0.97, 1.03);
  pr.leg = rng.uniform(0.97, 1.03);
  pr.width = rng.uniform(0.97, 1.03);
  pr.girth = rng.uniform(0.97, 1.03);

  // Joint layout in model units.
  const double y_spine = 0.20 * pr.torso, y_neck = 0.50 * pr.torso, y_head = 0.62 * pr.torso;
  const double y_shoulder = 0.45 * pr.torso;
  const double x_shoulder = 0.20 * pr.width, x_hip = 0.09 * pr.width;
  auto arm_s = [&](double s) { return x_shoulder + (s - 0.20) * pr.arm; };
  const double s_elbow = arm_s(0.48), s_wrist = arm_s(0.74);
  const double s_hip = 0.05 * pr.leg, s_knee = 0.48 * pr.leg, s_ankle = 0.88 * pr.leg;
  std::vector<double> y_extra;
  for (int m = 1; m <= extra; ++m) y_extra.push_back(y_spine + 0.20 * pr.torso * m / extra);

  // Node numbering.
  const int n_pelvis = 0, n_spine = 1;
  const int n_last_spine = 1 + extra;
  const int n_neck = 2 + extra, n_head = 3 + extra;
  const int n_lsh = 4 + extra, n_lel = 5 + extra, n_lwr = 6 + extra;
  const int n_rsh = 7 + extra, n_rel = 8 + extra, n_rwr = 9 + extra;
  const int n_lhip = 10 + extra, n_lknee = 11 + extra, n_lank = 12 + extra;
  const int n_rhip = 13 + extra, n_rknee = 14 + extra, n_rank = 15 + extra;
  const int nodes = 16 + extra;

  BodyModel model;
  model.parents.assign(nodes, -1);
  model.joint_names.assign(nodes, "");
  model.joint_names[n_pelvis] = "pelvis";
  model.joint_names[n_spine] = "spine";
  model.parents[n_spine] = n_pelvis;
  for (int m = 1; m <= extra; ++m) {
    model.joint_names[n_spine + m] = "spine_" + std::to_string(m + 1);
    model.parents[n_spine + m] = n_spine + m - 1;
  }
  const std::pair<int, std::pair<const char*, int>> named[] = {
      {n_neck, {"neck", n_last_spine}},          {n_head, {"head", n_neck}},
      {n_lsh, {"left_shoulder", n_last_spine}},  {n_lel, {"left_elbow", n_lsh}},
      {n_lwr, {"left_wrist", n_lel}},            {n_rsh, {"right_shoulder", n_last_spine}},
      {n_rel, {"right_elbow", n_rsh}},           {n_rwr, {"right_wrist", n_rel}},
      {n_lhip, {"left_hip", n_pelvis}},          {n_lknee, {"left_knee", n_lhip}},
      {n_lank, {"left_ankle", n_lknee}},         {n_rhip, {"right_hip", n_pelvis}},
      {n_rknee, {"right_knee", n_rhip}},         {n_rank, {"right_ankle", n_rknee}},
  };
  for (const auto& [node, np] : named) {
    model.joint_names[node] = np.first;
    model.parents[node] = np.second;
  }

  // Tubes. Left limbs are built directly, right limbs as exact x-mirrors.
  const double g = pr.girth;
  TubeSpec torso;
  torso.kind = TubeKind::Torso;
  torso.stations = {-0.12 * pr.torso, 0.0, y_spine};
  for (double y : y_extra) torso.stations.push_back(y);
  torso.stations.push_back(y_neck);
  torso.stations.push_back(0.52 * pr.torso);
  torso.center = [](double s) { return Eigen::Vector3d(0.0, s, 0.0); };
  torso.u = Eigen::Vector3d::UnitX();
  torso.w = Eigen::Vector3d::UnitZ();
  torso.ru = Profile{{{-0.12, 0.15}, {0.0, 0.16}, {0.15, 0.14}, {0.35, 0.17}, {0.45, 0.18}, {0.52, 0.12}}}.scaled(
      pr.torso, pr.width * g);
  torso.rw = Profile{{{-0.12, 0.09}, {0.0, 0.10}, {0.15, 0.09}, {0.35, 0.11}, {0.45, 0.10}, {0.52, 0.07}}}.scaled(
      pr.torso, g);
  torso.n = ring_size(16, k_target);

  TubeSpec head;
  head.kind = TubeKind::Head;
  head.stations = {0.46 * pr.torso, y_head, 0.78 * pr.torso};
  head.center = torso.center;
  head.u = Eigen::Vector3d::UnitX();
  head.w = Eigen::Vector3d::UnitZ();
  head.ru = Profile{{{0.46, 0.045}, {0.54, 0.05}, {0.64, 0.10}, {0.72, 0.09}, {0.78, 0.05}}}.scaled(pr.torso, g);
  head.rw = head.ru;
  head.n = ring_size(12, k_target);

  TubeSpec arm;
  arm.kind = TubeKind::LeftArm;
  arm.stations = {arm_s(0.12), x_shoulder, s_elbow, s_wrist, arm_s(0.84)};
  arm.center = [y_shoulder](double s) { return Eigen::Vector3d(s, y_shoulder, 0.0); };
  arm.u = Eigen::Vector3d::UnitY();
  arm.w = Eigen::Vector3d::UnitZ();
  arm.ru = Profile{{{arm_s(0.12), 0.055}, {x_shoulder, 0.055}, {s_elbow, 0.042}, {s_wrist, 0.033},
                    {arm_s(0.84), 0.035}}}
               .scaled(1.0, g);
  arm.rw = arm.ru;
  arm.n = ring_size(8, k_target);

  TubeSpec leg;
  leg.kind = TubeKind::LeftLeg;
  leg.stations = {0.0, s_hip, s_knee, s_ankle, 0.92 * pr.leg};
  leg.center = [x_hip](double s) { return Eigen::Vector3d(x_hip, -s, 0.0); };
  leg.u = Eigen::Vector3d::UnitX();
  leg.w = Eigen::Vector3d::UnitZ();
  leg.ru = Profile{{{0.0, 0.05}, {0.10, 0.075}, {0.48, 0.055}, {0.88, 0.04}, {0.92, 0.04}}}.scaled(pr.leg, g);
  leg.rw = leg.ru;
  leg.n = ring_size(8, k_target);

  TubeSpec rarm = arm, rleg = leg;
  rarm.kind = TubeKind::RightArm;
  rarm.mirror_x = true;
  rleg.kind = TubeKind::RightLeg;
  rleg.mirror_x = true;
  const std::vector<TubeSpec> specs{torso, head, arm, rarm, leg, rleg};

  // Ring spacing chosen so the vertex count lands closest to the target.
  double best_d = 0.1;
  int best_err = -1;
  for (int i = 0; i <= 600; ++i) {
    double d = 0.005 * std::pow(1.01, i);
    int err = std::abs(count_vertices(specs, d) - k_target);
    if (best_err < 0 || err < best_err) best_err = err, best_d = d;
  }

  Builder b;
  std::vector<std::vector<Ring>> rings;
  for (const auto& spec : specs) rings.push_back(b.add_tube(spec, best_d));
  const auto& R_torso = rings[0];
  const auto& R_head = rings[1];
  const auto& R_larm = rings[2];
  const auto& R_rarm = rings[3];
  const auto& R_lleg = rings[4];
  const auto& R_rleg = rings[5];
  const int K = static_cast<int>(b.verts.size());

  // Symmetry groups with the mirror code of each member relative to the first.
  std::vector<int> code(K, kSame);
  auto add_group = [&](std::initializer_list<std::pair<int, int>> members) {
    std::vector<int> group;
    for (auto [k, c] : members) {
      group.push_back(k);
      code[k] = c;
    }
    model.symmetry.groups.push_back(std::move(group));
  };
  for (const auto& ring : R_torso) {
    const auto& r = ring.ids;
    const int n = static_cast<int>(r.size());
    for (int i = 0; i < n / 4; ++i)
      add_group({{r[i], kSame}, {r[n - 1 - i], kFlipZ}, {r[n / 2 - 1 - i], kFlipX}, {r[n / 2 + i], kFlipX | kFlipZ}});
  }
  for (const auto& ring : R_head) {
    const auto& r = ring.ids;
    const int n = static_cast<int>(r.size());
    for (int i = 0; i < n / 4; ++i) add_group({{r[i], kSame}, {r[n / 2 - 1 - i], kFlipX}});
    for (int i = n / 2; i < 3 * n / 4; ++i) add_group({{r[i], kSame}, {r[3 * n / 2 - 1 - i], kFlipX}});
  }
  for (const auto& pair : {std::make_pair(&R_larm, &R_rarm), std::make_pair(&R_lleg, &R_rleg)}) {
    for (size_t ri = 0; ri < pair.first->size(); ++ri) {
      const auto& l = (*pair.first)[ri].ids;
      const auto& r = (*pair.second)[ri].ids;
      const int n = static_cast<int>(l.size());
      for (int i = 0; i < n / 2; ++i)
        add_group({{l[i], kSame}, {l[n - 1 - i], kFlipZ}, {r[i], kFlipX}, {r[n - 1 - i], kFlipX | kFlipZ}});
    }
  }
  model.symmetry.rebuild_index(K);

  auto flip = [](Eigen::Vector3d p, int c) {
    if (c & kFlipX) p.x() = -p.x();
    if (c & kFlipZ) p.z() = -p.z();
    return p;
  };
  // Copy each group's first member onto the others so mirrors hold exactly.
  auto symmetrize = [&](std::vector<Eigen::Vector3d>& field) {
    for (const auto& group : model.symmetry.groups)
      for (size_t m = 1; m < group.size(); ++m) field[group[m]] = flip(field[group[0]], code[group[m]]);
  };
  symmetrize(b.verts);

  model.template_vertices.resize(K, 3);
  for (int k = 0; k < K; ++k) model.template_vertices.row(k) = b.verts[k].transpose();
  model.faces.resize(static_cast<int>(b.faces.size()), 3);
  for (size_t f = 0; f < b.faces.size(); ++f) model.faces.row(static_cast<int>(f)) = b.faces[f].transpose();

  // Shape bases.
  model.shape_basis.setZero(3 * K, kShapeDim);
  for (int basis = 0; basis < kShapeDim; ++basis) {
    std::vector<Eigen::Vector3d> d(K, Eigen::Vector3d::Zero());
    for (int k = 0; k < K; ++k) {
      const Eigen::Vector3d& p = b.verts[k];
      const VertexInfo& vi = b.info[k];
      const Eigen::Vector3d r = p - vi.center;
      const double side = vi.center.x() >= 0.0 ? 1.0 : -1.0;
      const bool is_torso = vi.kind == TubeKind::Torso;
      const bool is_arm = vi.kind == TubeKind::LeftArm || vi.kind == TubeKind::RightArm;
      const bool is_leg = vi.kind == TubeKind::LeftLeg || vi.kind == TubeKind::RightLeg;
      switch (basis) {
        case 0:  // overall scale
          d[k] = 0.02 * p;
          break;
        case 1:  // girth
          d[k] = 0.08 * r;
          break;
        case 2:  // arm length
          if (is_arm) d[k].x() = side * 0.06 * std::max(0.0, std::abs(p.x()) - x_shoulder);
          break;
        case 3:  // leg length
          if (is_leg) d[k].y() = 0.06 * p.y();
          break;
        case 4:  // torso width
          if (is_torso) d[k].x() = 0.12 * p.x();
          if (is_arm) d[k].x() = side * 0.12 * x_shoulder;
          break;
        case 5:  // torso depth
          if (is_torso) d[k].z() = 0.15 * p.z();
          break;
        case 6: {  // shoulder breadth
          double t = smoothstep(0.25, 0.45, p.y());
          if (is_torso) d[k].x() = 0.15 * p.x() * t;
          if (is_arm) d[k].x() = side * 0.15 * x_shoulder;
          break;
        }
        case 7: {  // hip width
          if (is_torso) d[k].x() = 0.10 * p.x() * (1.0 - smoothstep(0.0, 0.2, p.y()));
          if (is_leg) d[k].x() = side * 0.10 * x_hip + 0.10 * r.x();
          break;
        }
        case 8:  // head size
          if (vi.kind == TubeKind::Head) d[k] = 0.12 * (p - Eigen::Vector3d(0.0, y_head, 0.0));
          break;
        case 9: {  // waist depth
          double bump = std::exp(-std::pow((p.y() - 0.1) / 0.12, 2));
          if (is_torso) d[k] = Eigen::Vector3d(0.05 * p.x(), 0.0, 0.25 * p.z()) * bump;
          break;
        }
      }
    }
    symmetrize(d);
    for (int k = 0; k < K; ++k) model.shape_basis.block<3, 1>(3 * k, basis) = d[k];
  }

  // Joint regressor: uniform average of the ring placed at each joint.
  auto ring_at = [](const std::vector<Ring>& tube, double s) -> const Ring& {
    const Ring* best = &tube.front();
    for (const auto& r : tube)
      if (std::abs(r.s - s) < std::abs(best->s - s)) best = &r;
    return *best;
  };
  model.joint_regressor_rest.setZero(nodes, K);
  auto set_joint = [&](int node, const Ring& ring) {
    for (int k : ring.ids) model.joint_regressor_rest(node, k) = 1.0 / static_cast<double>(ring.ids.size());
  };
  set_joint(n_pelvis, ring_at(R_torso, 0.0));
  set_joint(n_spine, ring_at(R_torso, y_spine));
  for (int m = 1; m <= extra; ++m) set_joint(n_spine + m, ring_at(R_torso, y_extra[m - 1]));
  set_joint(n_neck, ring_at(R_torso, y_neck));
  set_joint(n_head, ring_at(R_head, y_head));
  set_joint(n_lsh, ring_at(R_larm, x_shoulder));
  set_joint(n_lel, ring_at(R_larm, s_elbow));
  set_joint(n_lwr, ring_at(R_larm, s_wrist));
  set_joint(n_rsh, ring_at(R_rarm, x_shoulder));
  set_joint(n_rel, ring_at(R_rarm, s_elbow));
  set_joint(n_rwr, ring_at(R_rarm, s_wrist));
  set_joint(n_lhip, ring_at(R_lleg, s_hip));
  set_joint(n_lknee, ring_at(R_lleg, s_knee));
  set_joint(n_lank, ring_at(R_lleg, s_ankle));
  set_joint(n_rhip, ring_at(R_rleg, s_hip));
  set_joint(n_rknee, ring_at(R_rleg, s_knee));
  set_joint(n_rank, ring_at(R_rleg, s_ankle));
  model.pose_regressor = model.joint_regressor_rest.bottomRows(nodes - 1);

  // Skinning weights: linear blends between consecutive pivots along each tube.
  std::vector<int> torso_nodes{n_pelvis, n_spine};
  std::vector<double> torso_pos{0.0, y_spine};
  for (int m = 1; m <= extra; ++m) torso_nodes.push_back(n_spine + m), torso_pos.push_back(y_extra[m - 1]);
  torso_nodes.push_back(n_neck), torso_pos.push_back(y_neck);
  model.skin_weights.setZero(K, nodes);
  for (int k = 0; k < K; ++k) {
    const VertexInfo& vi = b.info[k];
    auto row = model.skin_weights.row(k);
    switch (vi.kind) {
      case TubeKind::Torso:
        chain_weights(vi.s, torso_nodes, torso_pos, 0.06, row);
        break;
      case TubeKind::Head:
        chain_weights(vi.s, {n_last_spine, n_neck, n_head}, {0.0, y_neck, y_head}, 0.04, row);
        break;
      case TubeKind::LeftArm:
        chain_weights(vi.s, {n_last_spine, n_lsh, n_lel, n_lwr}, {0.0, x_shoulder, s_elbow, s_wrist}, 0.06, row);
        break;
      case TubeKind::RightArm:
        chain_weights(vi.s, {n_last_spine, n_rsh, n_rel, n_rwr}, {0.0, x_shoulder, s_elbow, s_wrist}, 0.06, row);
        break;
      case TubeKind::LeftLeg:
        chain_weights(vi.s, {n_pelvis, n_lhip, n_lknee, n_lank}, {0.0, s_hip, s_knee, s_ankle}, 0.06, row);
        break;
      case TubeKind::RightLeg:
        chain_weights(vi.s, {n_pelvis, n_rhip, n_rknee, n_rank}, {0.0, s_hip, s_knee, s_ankle}, 0.06, row);
        break;
    }
  }

  // Parts.
  model.parts.names = {"head",           "torso",          "left_upper_arm", "left_lower_arm", "right_upper_arm",
                       "right_lower_arm", "left_upper_leg", "left_lower_leg", "right_upper_leg", "right_lower_leg"};
  model.parts.vertices.assign(model.parts.names.size(), {});
  for (int k = 0; k < K; ++k) {
    const VertexInfo& vi = b.info[k];
    int part = 0;
    switch (vi.kind) {
      case TubeKind::Head: part = 0; break;
      case TubeKind::Torso: part = 1; break;
      case TubeKind::LeftArm: part = vi.s < s_elbow ? 2 : 3; break;
      case TubeKind::RightArm: part = vi.s < s_elbow ? 4 : 5; break;
      case TubeKind::LeftLeg: part = vi.s < s_knee ? 6 : 7; break;
      case TubeKind::RightLeg: part = vi.s < s_knee ? 8 : 9; break;
    }
    model.parts.vertices[part].push_back(k);
  }
  model.parts.rebuild_index(K);

  validate(model);
  return model;
}

std::vector<Eigen::VectorXd> synth_mocap(const BodyModel& model, int count, std::uint64_t seed) {
  const int J = model.num_joints();
  std::map<std::string, int> index;
  for (int j = 1; j <= J && j < static_cast<int>(model.joint_names.size()); ++j) index[model.joint_names[j]] = j;
  auto node = [&](const char* name) {
    auto it = index.find(name);
    return it == index.end() ? -1 : it->second;
  };
  const int spine = node("spine"), neck = node("neck"), head = node("head");
  const int lsh = node("left_shoulder"), lel = node("left_elbow"), rsh = node("right_shoulder"),
            rel = node("right_elbow");
  const int lhip = node("left_hip"), lknee = node("left_knee"), lank = node("left_ankle");
  const int rhip = node("right_hip"), rknee = node("right_knee"), rank = node("right_ankle");

  using Eigen::AngleAxisd;
  using Eigen::Vector3d;
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<Eigen::VectorXd> poses;
  poses.reserve(count);
  for (int p = 0; p < count; ++p) {
    std::vector<Eigen::Matrix3d> R(J + 1, Eigen::Matrix3d::Identity());
    auto set = [&](int j, const Eigen::Matrix3d& m) {
      if (j > 0) R[j] = m;
    };
    const double phase = rng.uniform(0.0, 2.0 * kPi);
    const double walk = rng.uniform(0.0, 0.7);
    const double squat = rng.uniform() < 0.3 ? rng.uniform(0.0, 1.1) : 0.0;
    // Negative lowering raises the arm above the shoulder.
    const double lower_l = rng.uniform(-1.3, 1.4), lower_r = rng.uniform(-1.3, 1.4);
    const double elbow_l = rng.uniform(0.0, 1.8), elbow_r = rng.uniform(0.0, 1.8);
    const double kick_l = rng.uniform() < 0.2 ? rng.uniform(0.0, 0.8) : 0.0;
    const double kick_r = rng.uniform() < 0.2 ? rng.uniform(0.0, 0.8) : 0.0;
    const double twist = rng.uniform(-0.3, 0.3), lean = rng.uniform(-0.15, 0.3);
    const double swing = walk * std::sin(phase);

    auto rx = [](double a) { return AngleAxisd(a, Vector3d::UnitX()).toRotationMatrix(); };
    auto ry = [](double a) { return AngleAxisd(a, Vector3d::UnitY()).toRotationMatrix(); };
    auto rz = [](double a) { return AngleAxisd(a, Vector3d::UnitZ()).toRotationMatrix(); };
    // Hip flexion about -x swings the leg forward; knee flexion about +x folds it back.
    set(lhip, rz(kick_l) * rx(-swing - squat));
    set(rhip, rz(-kick_r) * rx(swing - squat));
    set(lknee, rx(std::max(0.0, walk * std::cos(phase)) * 0.8 + 2.0 * squat));
    set(rknee, rx(std::max(0.0, -walk * std::cos(phase)) * 0.8 + 2.0 * squat));
    set(lank, rx(-0.8 * squat));
    set(rank, rx(-0.8 * squat));
    // Arms lowered about z, swung against the legs about y, elbows folded forward.
    set(lsh, rz(-lower_l) * ry(-swing));
    set(rsh, rz(lower_r) * ry(-swing));
    set(lel, ry(-elbow_l));
    set(rel, ry(elbow_r));
    set(spine, ry(twist) * rx(lean + 0.3 * squat));
    set(neck, rx(rng.uniform(-0.2, 0.2)));
    set(head, ry(rng.uniform(-0.4, 0.4)));

    Eigen::VectorXd theta(3 * J);
    for (int j = 1; j <= J; ++j) {
      AngleAxisd aa(R[j]);
      Vector3d w = aa.angle() * aa.axis();
      for (int c = 0; c < 3; ++c) w(c) += 0.05 * rng.normal();
      theta.segment<3>(3 * (j - 1)) = canonicalize_axis_angle(w);
    }
    poses.push_back(std::move(theta));
  }
  return poses;
}

namespace {

std::vector<Eigen::Vector3d> group_means(const BodyModel& model) {
  std::vector<Eigen::Vector3d> means;
  for (const auto& group : model.symmetry.groups) {
    Eigen::Vector3d m = Eigen::Vector3d::Zero();
    for (int k : group) {
      Eigen::Vector3d p = model.template_vertices.row(k).transpose();
      m += Eigen::Vector3d(std::abs(p.x()), p.y(), std::abs(p.z()));
    }
    means.push_back(m / static_cast<double>(group.size()));
  }
  return means;
}

}  // namespace

Colors smooth_palette(const BodyModel& model, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::Matrix3d freq;
  Eigen::Vector3d phase;
  for (int c = 0; c < 3; ++c) {
    for (int a = 0; a < 3; ++a) freq(c, a) = rng.uniform(-1.5, 1.5);
    phase(c) = rng.uniform(0.0, 2.0 * kPi);
  }
  auto means = group_means(model);
  Colors C(model.num_vertices(), 3);
  for (int g = 0; g < model.symmetry.size(); ++g) {
    Eigen::Vector3d arg = freq * means[g] + phase;
    Eigen::RowVector3d color;
    for (int c = 0; c < 3; ++c) color(c) = 0.5 + 0.3 * std::sin(arg(c));
    for (int k : model.symmetry.groups[g]) C.row(k) = color;
  }
  return C;
}

Colors part_palette(const BodyModel& model, std::uint64_t seed) {
  Rng rng(seed);
  auto jitter = [&](Eigen::RowVector3d c) {
    for (int i = 0; i < 3; ++i) c(i) = std::clamp(c(i) + rng.uniform(-0.08, 0.08), 0.0, 1.0);
    return c;
  };
  const Eigen::RowVector3d skin = jitter({0.85, 0.65, 0.52});
  const Eigen::RowVector3d shirt = jitter({0.20, 0.35, 0.75});
  const Eigen::RowVector3d stripe = jitter({0.90, 0.90, 0.85});
  const Eigen::RowVector3d trousers = jitter({0.25, 0.22, 0.20});
  auto means = group_means(model);
  Colors C(model.num_vertices(), 3);
  for (int g = 0; g < model.symmetry.size(); ++g) {
    const auto& group = model.symmetry.groups[g];
    const std::string& part = model.parts.names[model.parts.part_of[group[0]]];
    Eigen::RowVector3d color;
    if (part == "head" || part.ends_with("lower_arm"))
      color = skin;
    else if (part.ends_with("leg"))
      color = trousers;
    else
      color = std::sin(20.0 * means[g].y()) > 0.0 ? shirt : stripe;
    for (int k : group) C.row(k) = color;
  }
  return C;
}

ImageRGB synth_background(int width, int height, std::uint64_t seed) {
  Rng rng(seed);
  constexpr int kWaves = 4;
  double fx[3][kWaves], fy[3][kWaves], ph[3][kWaves];
  for (int c = 0; c < 3; ++c)
    for (int w = 0; w < kWaves; ++w) {
      fx[c][w] = rng.uniform(-3.0, 3.0);
      fy[c][w] = rng.uniform(-3.0, 3.0);
      ph[c][w] = rng.uniform(0.0, 2.0 * kPi);
    }
  ImageRGB img(width, height);
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) {
      Eigen::Vector2d p = to_image({static_cast<double>(x), static_cast<double>(y)}, img.size());
      for (int c = 0; c < 3; ++c) {
        double v = 0.0;
        for (int w = 0; w < kWaves; ++w) v += std::sin(fx[c][w] * p.x() + fy[c][w] * p.y() + ph[c][w]);
        img.at(x, y, c) = 0.5 + 0.35 * v / kWaves;
      }
    }
  return img;
}

}  // namespace consensus
