#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nptails/asymptotics.hpp"
#include "nptails/evolution.hpp"
#include "nptails/np_constants.hpp"

namespace nptails::app {

inline constexpr int kSchemaVersion = 1;

struct GridSpec {
  double h = 1.0 / 32.0;
  double u_max = 1500.0;
  double v_max = 3000.0;
};

// One tail fit: which curve and column feed which scenario.
struct ScenarioSpec {
  std::string id;
  Scenario scenario = Scenario::InteriorZeroNP;
  std::string curve;
  std::string field = "psi";  // psi, Tpsi, T2psi, phi, Tphi, T2phi, v2dvphi
  int k = 0;
};

enum class CheckKind { Tail, Ladder, InvertedConstant, Huygens, NpDrift, Convergence, TwoOracle };

struct CheckSpec {
  CheckKind kind = CheckKind::Tail;
  std::string scenario;                // Tail
  std::vector<std::string> ladder;     // Ladder: psi, T psi, T^2 psi fits in order
  std::string curve;                   // Huygens
  int k = 1;                           // InvertedConstant
  double expect = 0.0;                 // InvertedConstant
  double exponent_tolerance = 0.05;    // Tail
  double amplitude_tolerance = 0.15;   // Tail (relative), Huygens (times h^2)
  double tolerance = 0.0;              // InvertedConstant, Ladder, NpDrift, TwoOracle
  double after_v = 0.0;                // Huygens
  double lo = 3.6, hi = 4.4;           // Convergence
};

struct ConvergenceSpec {
  int levels = 3;
  GridSpec grid{0.125, 100.0, 300.0};
};

struct RunConfig {
  std::string name;
  nlohmann::json model;  // validated blocks, rebuilt on demand
  nlohmann::json data;
  GridSpec grid;
  std::vector<ObserverSpec> observers;
  std::vector<ScenarioSpec> scenarios;
  std::vector<CheckSpec> checks;
  int orders = 1;  // time-inverted constants I0^(1..orders)
  std::optional<ConvergenceSpec> convergence;
  EvolveOptions evolve;
  FitOptions fit;
  std::filesystem::path output;
  int threads = 1;

  std::shared_ptr<const CoordinateMap> make_coordinate_map() const;
  // Cone data out to v_max (the grid's by default).
  CharacteristicData make_characteristic(std::optional<double> v_max = std::nullopt) const;
  // Full data surface; characteristic families map to their null slice.
  MixedSurfaceData make_surface() const;
};

// Raises SchemaError naming the JSON path of the first offending value.
RunConfig parse_config(const nlohmann::json& doc, const std::string& source);
RunConfig load_config(const std::filesystem::path& file);

SpacetimeModel parse_model(const nlohmann::json& block, const std::string& path = "/model");

// Default output directory: $NPTAILS_OUT, else ./nptails-out.
std::filesystem::path default_output_dir();

}  // namespace nptails::app
