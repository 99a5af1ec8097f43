#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Core>

#include "consensus_mesh/body_model.h"
#include "consensus_mesh/raster.h"

namespace consensus {

/// mt19937_64 with a fixed bits-to-double mapping, so sequences do not
/// depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform();  // [0, 1)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();   // Box-Muller, no caching

 private:
  std::mt19937_64 engine_;
};

/// Procedural capsule-limb humanoid: y up, facing +z, left = +x, root joint at
/// the origin, about 1.7 units tall. Left/right and front/back vertices are
/// exact mirrors, so the symmetry table holds exactly. joints >= 15; joints
/// beyond 15 subdivide the spine.
BodyModel synth_model(std::uint64_t seed, int k_target = 600, int joints = 15);

/// Plausible poses (walk cycles, squats, arm raises, elbow flexion, torso
/// twist, plus joint noise) for the joint names synth_model produces.
std::vector<Eigen::VectorXd> synth_mocap(const BodyModel& model, int count = 200, std::uint64_t seed = 0);

/// Group-constant colors that vary smoothly with the rest-pose position.
Colors smooth_palette(const BodyModel& model, std::uint64_t seed);

/// Group-constant clothing-style colors: skin, shirt, trousers, with
/// horizontal stripes on the shirt.
Colors part_palette(const BodyModel& model, std::uint64_t seed);

/// Smooth random color field used as scene background.
ImageRGB synth_background(int width, int height, std::uint64_t seed);

/// Camera that shows the rest-pose model upright and facing the viewer.
Eigen::Vector3d front_view_rotation();

}  // namespace consensus
