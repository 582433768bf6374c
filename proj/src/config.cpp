#include "switchctl/config.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "switchctl/error.hpp"

namespace switchctl {

using nlohmann::json;

std::string_view to_string(Preset preset) {
  switch (preset) {
    case Preset::kScalarA: return "scalar-a";
    case Preset::kScalarB: return "scalar-b";
    case Preset::kScalarC: return "scalar-c";
    case Preset::kQuadrotor: return "quadrotor";
    case Preset::kCustom: return "custom";
  }
  return "custom";
}

Preset parse_preset(std::string_view name) {
  if (name == "scalar-a") return Preset::kScalarA;
  if (name == "scalar-b") return Preset::kScalarB;
  if (name == "scalar-c") return Preset::kScalarC;
  if (name == "quadrotor") return Preset::kQuadrotor;
  if (name == "custom") return Preset::kCustom;
  throw SwitchError(ErrorCode::kConfig, "unknown preset '" + std::string(name) +
                                            "' (expected scalar-a|scalar-b|scalar-c|quadrotor|custom)");
}

namespace {

[[noreturn]] void field_error(const std::string& field, const std::string& message) {
  throw SwitchError(ErrorCode::kConfig, "field '" + field + "': " + message);
}

ExperimentConfig scalar_preset(Preset preset, std::vector<double> gains) {
  ExperimentConfig cfg;
  cfg.preset = preset;
  cfg.horizon = 100000;
  cfg.trials = 100;
  cfg.plant = PlantKind::kScalar;
  cfg.initial_state = StateVector{1.0};
  cfg.pool.gains = std::move(gains);
  cfg.disturbance = DisturbanceSpec::uniform(-0.3, 0.7, 1);
  cfg.cost = CostKind::kScalarQuadratic;
  cfg.cert = CertParams{1.5, 0.995, 75.0};
  return cfg;
}

// Wraps a JSON object, tracks the dotted path for diagnostics and rejects
// keys nobody asked about.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) field_error(path_.empty() ? "<root>" : path_, "expected an object");
  }

  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, value] : node_.items()) {
      if (!seen_.count(key)) field_error(child_path(key), "unknown key");
    }
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return node_.contains(key);
  }

  const json& at(const std::string& key) {
    seen_.insert(key);
    return node_.at(key);
  }

  std::string child_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void read(const std::string& key, double& out) {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_number()) field_error(child_path(key), "expected a number");
    out = v.get<double>();
    if (!std::isfinite(out)) field_error(child_path(key), "must be finite");
  }

  void read(const std::string& key, std::size_t& out) {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_number_unsigned()) field_error(child_path(key), "expected a non-negative integer");
    out = v.get<std::size_t>();
  }

  void read(const std::string& key, std::uint64_t& out, int) {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_number_unsigned()) field_error(child_path(key), "expected a non-negative integer");
    out = v.get<std::uint64_t>();
  }

  void read(const std::string& key, bool& out) {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_boolean()) field_error(child_path(key), "expected true or false");
    out = v.get<bool>();
  }

  void read(const std::string& key, std::string& out) {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_string()) field_error(child_path(key), "expected a string");
    out = v.get<std::string>();
  }

  void read(const std::string& key, std::vector<double>& out) {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_array()) field_error(child_path(key), "expected an array of numbers");
    out.clear();
    for (const json& e : v) {
      if (!e.is_number()) field_error(child_path(key), "expected an array of numbers");
      out.push_back(e.get<double>());
    }
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_plant(Section& root, ExperimentConfig& cfg) {
  if (!root.has("plant")) return;
  Section s(root.at("plant"), "plant");
  std::string kind = cfg.plant == PlantKind::kScalar ? "scalar" : "quadrotor";
  s.read("kind", kind);
  if (kind == "scalar") {
    cfg.plant = PlantKind::kScalar;
  } else if (kind == "quadrotor") {
    cfg.plant = PlantKind::kQuadrotor;
  } else {
    field_error("plant.kind", "expected scalar|quadrotor");
  }
  s.read("mass", cfg.quadrotor.mass);
  s.read("inertia", cfg.quadrotor.inertia);
  s.read("arm_length", cfg.quadrotor.arm_length);
  s.read("drag_x", cfg.quadrotor.drag_x);
  s.read("drag_theta", cfg.quadrotor.drag_theta);
  s.read("gravity", cfg.quadrotor.gravity);
  s.read("dt", cfg.quadrotor.dt);
}

void read_pool(Section& root, ExperimentConfig& cfg) {
  if (!root.has("pool")) return;
  Section s(root.at("pool"), "pool");
  s.read("gains", cfg.pool.gains);
  s.read("scales", cfg.pool.scales);
  s.read("mass_estimate_factor", cfg.pool.mass_estimate_factor);
  s.read("inertia_estimate_factor", cfg.pool.inertia_estimate_factor);
  if (s.has("nominal")) {
    Section n(s.at("nominal"), "pool.nominal");
    n.read("k_p", cfg.pool.nominal.k_p);
    n.read("k_d", cfg.pool.nominal.k_d);
    n.read("k_p_theta", cfg.pool.nominal.k_p_theta);
    n.read("k_d_theta", cfg.pool.nominal.k_d_theta);
    n.read("thrust_clip", cfg.pool.nominal.thrust_clip);
    n.read("torque_clip", cfg.pool.nominal.torque_clip);
  }
}

void read_disturbance(Section& root, ExperimentConfig& cfg) {
  if (!root.has("disturbance")) return;
  Section s(root.at("disturbance"), "disturbance");
  std::string kind = cfg.disturbance.kind == DisturbanceKind::kUniform ? "uniform" : "gaussian";
  s.read("kind", kind);
  if (kind == "uniform") {
    cfg.disturbance.kind = DisturbanceKind::kUniform;
  } else if (kind == "gaussian") {
    cfg.disturbance.kind = DisturbanceKind::kGaussian;
  } else {
    field_error("disturbance.kind", "expected uniform|gaussian");
  }
  s.read("lo", cfg.disturbance.lo);
  s.read("hi", cfg.disturbance.hi);
  s.read("sigma", cfg.disturbance.sigma);
  s.read("truncation", cfg.disturbance.truncation);
}

void read_algorithm(Section& root, ExperimentConfig& cfg) {
  if (!root.has("algorithm")) return;
  Section s(root.at("algorithm"), "algorithm");
  if (s.has("name")) {
    std::string name;
    s.read("name", name);
    try {
      cfg.algorithm.algorithm = parse_algorithm(name);
    } catch (const SwitchError& e) {
      field_error("algorithm.name", e.what());
    }
  }
  if (s.has("eta")) {
    const json& v = s.at("eta");
    if (v.is_string() && v.get<std::string>() == "auto") {
      cfg.algorithm.eta.reset();
    } else if (v.is_number()) {
      cfg.algorithm.eta = v.get<double>();
    } else {
      field_error("algorithm.eta", "expected a number or \"auto\"");
    }
  }
  if (s.has("tau")) {
    const json& v = s.at("tau");
    if (v.is_string() && v.get<std::string>() == "auto") {
      cfg.algorithm.tau.reset();
    } else if (v.is_number_unsigned()) {
      cfg.algorithm.tau = v.get<std::size_t>();
    } else {
      field_error("algorithm.tau", "expected a positive integer or \"auto\"");
    }
  }
  s.read("c_eta", cfg.algorithm.c_eta);
  s.read("clip_ceiling", cfg.algorithm.clip_ceiling);
}

void read_certificate(Section& root, ExperimentConfig& cfg) {
  if (!root.has("certificate")) return;
  Section s(root.at("certificate"), "certificate");
  s.read("kappa", cfg.cert.kappa);
  s.read("rho", cfg.cert.rho);
  s.read("margin", cfg.cert.margin);
  if (s.has("escalation")) {
    Section e(s.at("escalation"), "certificate.escalation");
    e.read("enabled", cfg.escalation.enabled);
    e.read("d_kappa", cfg.escalation.d_kappa);
    e.read("d_margin", cfg.escalation.d_margin);
    e.read("max_restarts", cfg.escalation.max_restarts);
  }
}

void read_bound(Section& root, ExperimentConfig& cfg) {
  if (!root.has("bound")) return;
  Section s(root.at("bound"), "bound");
  if (s.has("lipschitz_dynamics")) {
    double v = 0;
    s.read("lipschitz_dynamics", v);
    cfg.bound.lipschitz_dynamics = v;
  }
  if (s.has("lipschitz_policy")) {
    double v = 0;
    s.read("lipschitz_policy", v);
    cfg.bound.lipschitz_policy = v;
  }
  s.read("pi0_bar", cfg.bound.pi0_bar);
}

void read_output(Section& root, ExperimentConfig& cfg) {
  if (!root.has("output")) return;
  Section s(root.at("output"), "output");
  std::string dir = cfg.output.dir.string();
  s.read("dir", dir);
  cfg.output.dir = dir;
  s.read("per_step", cfg.output.per_step);
}

}  // namespace

ExperimentConfig preset_config(Preset preset) {
  switch (preset) {
    case Preset::kScalarA: {
      // per-step baseline on the mildly unstable pool
      ExperimentConfig cfg = scalar_preset(preset, {-1.0, -0.3, 1.0});
      cfg.algorithm.algorithm = Algorithm::kExp3;
      return cfg;
    }
    case Preset::kScalarC:
      return scalar_preset(preset, {-1.0, -0.3, 1.0});
    case Preset::kScalarB:
      return scalar_preset(preset, {-1.0, 0.0, 1.0});
    case Preset::kQuadrotor: {
      ExperimentConfig cfg;
      cfg.preset = preset;
      cfg.horizon = 1000;
      cfg.trials = 100;
      cfg.plant = PlantKind::kQuadrotor;
      cfg.quadrotor = QuadrotorParams{};
      cfg.initial_state = StateVector{1.0, 0.0, 0.0, 0.0, 0.0, 0.0};
      cfg.pool.nominal = GeometricPDGains{};
      cfg.pool.scales = {0.1, 1.0, 10.0};
      cfg.pool.mass_estimate_factor = 2.0;
      cfg.pool.inertia_estimate_factor = 1.0;
      cfg.disturbance = DisturbanceSpec::gaussian(0.1, 4.0, 2);
      cfg.cost = CostKind::kPositionQuadratic;
      cfg.cert = CertParams{1.1, 0.995, 4.35};
      return cfg;
    }
    case Preset::kCustom:
      break;
  }
  ExperimentConfig cfg = scalar_preset(Preset::kCustom, {-1.0, 0.0, 1.0});
  cfg.horizon = 1000;
  cfg.trials = 1;
  return cfg;
}

void ExperimentConfig::validate() const {
  if (horizon < 1) field_error("horizon", "must be >= 1");
  if (trials < 1) field_error("trials", "must be >= 1");
  if (workers < 1) field_error("workers", "must be >= 1");
  const std::size_t dim = plant == PlantKind::kScalar ? 1 : 6;
  if (initial_state.size() != dim) {
    field_error("initial_state", "expected " + std::to_string(dim) + " entries for this plant");
  }
  if (!initial_state.all_finite()) field_error("initial_state", "entries must be finite");
  if (plant == PlantKind::kScalar) {
    if (pool.gains.empty()) field_error("pool.gains", "scalar pool needs at least one gain");
    if (cost != CostKind::kScalarQuadratic) field_error("cost", "scalar plant uses scalar_quadratic");
  } else {
    if (pool.scales.empty()) field_error("pool.scales", "quadrotor pool needs at least one scale");
    for (double s : pool.scales) {
      if (!(s > 0)) field_error("pool.scales", "scales must be > 0");
    }
    if (!(pool.mass_estimate_factor > 0)) field_error("pool.mass_estimate_factor", "must be > 0");
    if (!(pool.inertia_estimate_factor > 0)) field_error("pool.inertia_estimate_factor", "must be > 0");
    try {
      quadrotor.validate();
      pool.nominal.validate();
    } catch (const SwitchError& e) {
      field_error("plant/pool", e.what());
    }
  }
  const std::size_t wdim = plant == PlantKind::kScalar ? 1 : 2;
  if (disturbance.dim != wdim) field_error("disturbance", "dimension does not match the plant");
  try {
    disturbance.validate();
  } catch (const SwitchError& e) {
    field_error("disturbance", e.what());
  }
  if (!(cert.kappa >= 1.0)) field_error("certificate.kappa", "must be >= 1");
  if (!(cert.rho > 0.0 && cert.rho < 1.0)) field_error("certificate.rho", "must be in (0, 1)");
  if (!(cert.margin > 0.0)) field_error("certificate.margin", "must be > 0");
  if (escalation.enabled && !(escalation.d_kappa > 0 && escalation.d_margin > 0)) {
    field_error("certificate.escalation", "d_kappa and d_margin must be > 0");
  }
  if (algorithm.eta && !(*algorithm.eta > 0)) field_error("algorithm.eta", "must be > 0");
  if (algorithm.tau && *algorithm.tau < 1) field_error("algorithm.tau", "must be >= 1");
  if (!(algorithm.c_eta > 0)) field_error("algorithm.c_eta", "must be > 0");
  if (!(algorithm.clip_ceiling > 0)) field_error("algorithm.clip_ceiling", "must be > 0");
  if (algorithm.algorithm == Algorithm::kExp3Iss && algorithm.tau &&
      *algorithm.tau < min_batch_length(cert.kappa, cert.rho)) {
    field_error("algorithm.tau", "below the stability requirement " +
                                     std::to_string(min_batch_length(cert.kappa, cert.rho)));
  }
  if (!algorithm.eta || !algorithm.tau) {
    const std::size_t n = plant == PlantKind::kScalar ? pool.gains.size()
                                                      : pool.scales.size() * pool.scales.size() *
                                                            pool.scales.size() * pool.scales.size();
    if (horizon < n) field_error("horizon", "automatic eta/tau need horizon >= pool size");
  }
}

ExperimentConfig parse_config(std::string_view text, std::string_view source_name,
                              std::optional<Preset> preset_override) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw SwitchError(ErrorCode::kConfig, std::string(source_name) + ": " + e.what());
  }

  try {
    Section root(doc, "");
    Preset preset = Preset::kCustom;
    if (root.has("preset")) {
      std::string name;
      root.read("preset", name);
      preset = parse_preset(name);
    }
    if (preset_override) preset = *preset_override;
    ExperimentConfig cfg = preset_config(preset);

    root.read("horizon", cfg.horizon);
    root.read("trials", cfg.trials);
    root.read("master_seed", cfg.master_seed, 0);
    root.read("workers", cfg.workers);
    read_plant(root, cfg);
    if (root.has("initial_state")) {
      std::vector<double> x0;
      root.read("initial_state", x0);
      if (x0.empty() || x0.size() > kMaxDim) field_error("initial_state", "expected 1 to 6 entries");
      cfg.initial_state = StateVector(std::span<const double>(x0));
    }
    read_pool(root, cfg);
    cfg.disturbance.dim = cfg.plant == PlantKind::kScalar ? 1 : 2;
    read_disturbance(root, cfg);
    if (root.has("cost")) {
      std::string cost;
      root.read("cost", cost);
      if (cost == "scalar_quadratic") {
        cfg.cost = CostKind::kScalarQuadratic;
      } else if (cost == "position_quadratic") {
        cfg.cost = CostKind::kPositionQuadratic;
      } else {
        field_error("cost", "expected scalar_quadratic|position_quadratic");
      }
    }
    read_algorithm(root, cfg);
    read_certificate(root, cfg);
    read_bound(root, cfg);
    read_output(root, cfg);
    cfg.validate();
    return cfg;
  } catch (const SwitchError& e) {
    std::string message = e.what();
    const std::string prefix = std::string(to_string(ErrorCode::kConfig)) + ": ";
    if (e.code() == ErrorCode::kConfig && message.rfind(prefix, 0) == 0) message.erase(0, prefix.size());
    throw SwitchError(ErrorCode::kConfig, std::string(source_name) + ": " + message);
  } catch (const json::exception& e) {
    throw SwitchError(ErrorCode::kConfig, std::string(source_name) + ": " + e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path, std::optional<Preset> preset_override) {
  std::ifstream in(path);
  if (!in) throw SwitchError(ErrorCode::kConfig, "cannot open config file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path.string(), preset_override);
}

void apply_environment(ExperimentConfig& cfg) {
  if (const char* dir = std::getenv("SWITCHCTL_OUT_DIR"); dir && *dir) cfg.output.dir = dir;
  if (const char* workers = std::getenv("SWITCHCTL_WORKERS"); workers && *workers) {
    char* end = nullptr;
    const unsigned long v = std::strtoul(workers, &end, 10);
    if (*end != '\0' || v == 0) throw SwitchError(ErrorCode::kConfig, "SWITCHCTL_WORKERS must be a positive integer");
    cfg.workers = v;
  }
}

}  // namespace switchctl
