#pragma once

#include <string>

#include "consensus_mesh/types.h"

namespace consensus {

/// ASCII PLY with per-vertex uchar RGB (colors clamped to [0, 1]).
std::string mesh_to_ply(const Vertices& V, const Faces& faces, const Colors& colors);
void write_ply(const std::string& path, const Vertices& V, const Faces& faces, const Colors& colors);

/// Wavefront OBJ, geometry only.
void write_obj(const std::string& path, const Vertices& V, const Faces& faces);

}  // namespace consensus
