#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "consensus_mesh/body_model.h"
#include "consensus_mesh/camera.h"
#include "consensus_mesh/pose_prior.h"
#include "consensus_mesh/types.h"

namespace consensus {

inline constexpr int kFormatVersion = 1;

/// Model JSON (see docs/model_format.md). Loading validates the model.
std::string model_to_json(const BodyModel& model);
BodyModel model_from_json(const std::string& text);
void save_model(const std::string& path, const BodyModel& model);
BodyModel load_model(const std::string& path);

/// Per-image parameters: {"theta", "beta", "camera": {"rot", "t", "s"}, "phi"?}.
struct ViewParams {
  Eigen::VectorXd theta;
  ShapeVector beta = ShapeVector::Zero();
  CameraParams camera;
  std::optional<LatentVector> phi;
};

std::string params_to_json(const ViewParams& params);
ViewParams params_from_json(const std::string& text);
void save_params(const std::string& path, const ViewParams& params);
ViewParams load_params(const std::string& path);

/// MoCap pose sets: a JSON array of 3J-vectors.
void save_mocap(const std::string& path, const std::vector<Eigen::VectorXd>& poses);
std::vector<Eigen::VectorXd> load_mocap(const std::string& path);

/// Per-vertex colors as {"colors": [[r, g, b], ...]}.
void save_colors(const std::string& path, const Colors& colors);
Colors load_colors(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace consensus
