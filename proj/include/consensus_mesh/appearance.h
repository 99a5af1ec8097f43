#pragma once

#include <string>
#include <vector>

#include "consensus_mesh/body_model.h"
#include "consensus_mesh/color_recovery.h"
#include "consensus_mesh/model_io.h"
#include "consensus_mesh/raster.h"

namespace consensus {

/// Colored mesh recovered from one image under known parameters.
struct Recovery {
  Vertices V;
  ColoredMesh mesh;
  Eigen::VectorXd W;
};

Recovery recover_colors(const BodyModel& model, const ViewParams& params, const ImageRGB& image,
                        const VisibilityOptions& options = {},
                        const Eigen::Vector3d& fallback = Eigen::Vector3d::Constant(0.5));

/// Resolves part names plus the keywords "all", "none", "upper_body" (parts
/// without "leg" in the name) and "lower_body" (parts with it). Returns one
/// flag per part. Throws InvalidArgument for unknown names.
std::vector<char> select_parts(const PartTable& parts, const std::vector<std::string>& names);

/// Vertices of selected parts take source colors, the rest take target colors.
Colors merge_part_colors(const PartTable& parts, const std::vector<char>& selected, const Colors& source,
                         const Colors& target);

/// Renders the model under params with per-vertex colors.
ImageRGB render_with_colors(const BodyModel& model, const ViewParams& params, const Colors& colors, ImageSize size);

}  // namespace consensus
