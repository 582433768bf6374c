#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "switchctl/certificate.hpp"
#include "switchctl/controllers.hpp"
#include "switchctl/dynamics.hpp"
#include "switchctl/switching.hpp"

namespace switchctl {

enum class Preset { kScalarA, kScalarB, kScalarC, kQuadrotor, kCustom };

std::string_view to_string(Preset preset);
Preset parse_preset(std::string_view name);

enum class PlantKind { kScalar, kQuadrotor };
enum class CostKind { kScalarQuadratic, kPositionQuadratic };

struct PoolConfig {
  // Scalar plant: one LinearGain per entry.
  std::vector<double> gains;
  // Quadrotor: nominal gains times every combination of scales. The nominal
  // mass estimate is mass_estimate_factor * true mass.
  GeometricPDGains nominal;
  std::vector<double> scales;
  double mass_estimate_factor = 2.0;
  double inertia_estimate_factor = 1.0;
};

struct AlgorithmConfig {
  Algorithm algorithm = Algorithm::kExp3Iss;
  std::optional<double> eta;       // nullopt: recommended schedule
  std::optional<std::size_t> tau;  // nullopt: recommended schedule
  double c_eta = 1.0;
  double clip_ceiling = 1e9;
};

// Constants for the finite-gain l1 bound. Unset Lipschitz constants are
// derived from the pool where possible (scalar plant: L_f = 1, L_pi = max |K|).
struct BoundConfig {
  std::optional<double> lipschitz_dynamics;
  std::optional<double> lipschitz_policy;
  double pi0_bar = 0.0;
};

struct OutputConfig {
  std::filesystem::path dir = "out";
  bool per_step = true;
};

struct ExperimentConfig {
  Preset preset = Preset::kCustom;
  std::size_t horizon = 1000;
  std::size_t trials = 1;
  std::uint64_t master_seed = 0;
  std::size_t workers = 1;
  PlantKind plant = PlantKind::kScalar;
  QuadrotorParams quadrotor;
  StateVector initial_state{1.0};
  PoolConfig pool;
  DisturbanceSpec disturbance;
  CostKind cost = CostKind::kScalarQuadratic;
  AlgorithmConfig algorithm;
  CertParams cert;
  EscalationRule escalation;
  BoundConfig bound;
  OutputConfig output;

  // Throws SwitchError(kConfig) naming the offending field.
  void validate() const;
};

ExperimentConfig preset_config(Preset preset);

// Parses a JSON document. The preset named in the document (or
// `preset_override`) supplies defaults that the remaining fields override.
// Errors carry the source name and the line/column or field path.
ExperimentConfig parse_config(std::string_view text, std::string_view source_name = "<config>",
                              std::optional<Preset> preset_override = std::nullopt);
ExperimentConfig load_config(const std::filesystem::path& path, std::optional<Preset> preset_override = std::nullopt);

// SWITCHCTL_OUT_DIR and SWITCHCTL_WORKERS override the output directory and
// worker count; nothing else is read from the environment.
void apply_environment(ExperimentConfig& cfg);

}  // namespace switchctl
