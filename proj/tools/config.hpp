#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "calorix/caloric.hpp"
#include "calorix/geometry.hpp"

namespace calorix::cli {

struct ParamSpec {
  std::string name;
  std::string type;  // int, number, bool, int-list, number-list, data
  nlohmann::json default_value;  // null: no default
  bool required = false;
  std::string doc;
};

struct TaskInfo {
  std::string name;
  std::string summary;
  std::string topic;
  bool needs_mesh = true;
  std::vector<ParamSpec> params;
};

/// Fixed, ordered task list.
const std::vector<TaskInfo>& task_catalog();
const TaskInfo* find_task(const std::string& name);

struct OperatorBlock {
  int n = 2;
  std::vector<std::vector<double>> matrix;
  Parity parity = Parity::V;
};

struct GeometryBlock {
  SectionKind kind = SectionKind::Disk;
  std::vector<double> params;  // radius | a,b | a,b,c | r0
  std::vector<double> cos_coeffs;
  std::vector<double> sin_coeffs;
  double final_time = 1.0;
};

struct MeshBlock {
  int m_angular = 32;
  int m_time = 8;
  int m_radial = 8;
};

struct OutputBlock {
  std::filesystem::path directory;
  bool csv = true;
  bool json = true;
};

/// Validated experiment description. `echo` is the normalized config with
/// every default filled in; reports embed it verbatim.
struct ExperimentConfig {
  std::string task;
  std::uint64_t seed = 1;
  OperatorBlock op;
  std::optional<GeometryBlock> geometry;
  std::optional<MeshBlock> mesh;
  nlohmann::json params;
  OutputBlock output;
  std::filesystem::path base_dir;
  nlohmann::json echo;

  CoefficientMatrix matrix() const;
  CrossSection section() const;
  CylinderMesh build_mesh() const;
  /// Resolves a config-relative path.
  std::filesystem::path resolve(const std::string& path) const;
};

/// Throws Error{ConfigInvalid} naming the offending key.
ExperimentConfig parse_config(const nlohmann::json& j, const std::string& task, const std::filesystem::path& base_dir);
ExperimentConfig load_config(const std::filesystem::path& path, const std::string& task);

}  // namespace calorix::cli
