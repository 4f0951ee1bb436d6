#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nptails/initial_data.hpp"

namespace nptails {

// Characteristic rectangle u in [0, u_max], v in [v0, v_max] with du = dv = h.
struct NullGrid {
  double h = 0.0;
  double u_max = 0.0;
  double v0 = 0.0;
  double v_max = 0.0;
  int nu = 0;  // steps in u
  int nv = 0;  // steps in v

  double u(int i) const { return i * h; }
  double v(int j) const { return v0 + j * h; }
  std::uint64_t cells() const { return std::uint64_t(nu) * std::uint64_t(nv); }
};

NullGrid make_grid(double h, double u_max, double v0, double v_max);

enum class CurveKind { ConstantR, ConstantRstar, Scri, GammaAlpha };

const char* to_string(CurveKind kind) noexcept;
CurveKind curve_kind_from_string(const std::string& name);

struct ObserverSpec {
  CurveKind kind = CurveKind::ConstantR;
  double value = 0.0;  // r, r*, or alpha
  std::string id;
};

ObserverSpec constant_r(double r);
ObserverSpec constant_rstar(double rstar);
ObserverSpec scri_proxy();
ObserverSpec gamma_alpha(double alpha);

// One sample along an observer curve; Tpsi and T2psi are centred differences
// in u along the curve (NaN where the stencil leaves the series).
struct ObserverSample {
  double tau, u, v, r, phi, psi, Tpsi, T2psi, v2dvphi;
};

struct ObserverSeries {
  ObserverSpec spec;
  double tau_offset = 0.0;  // tau = u + tau_offset
  std::vector<ObserverSample> samples;
};

// Field sampled every `stride` grid steps in both u and v.
struct GridField {
  double h = 0.0;  // spacing between stored points
  double v0 = 0.0;
  int stride = 1;
  int nu = 0, nv = 0;  // stored intervals
  std::vector<double> values;

  double& at(int i, int j) { return values[std::size_t(i) * (nv + 1) + j]; }
  double at(int i, int j) const { return values[std::size_t(i) * (nv + 1) + j]; }
  double u(int i) const { return i * h; }
  double v(int j) const { return v0 + j * h; }
};

struct EvolveOptions {
  double sample_dt = 0.5;  // observer sampling interval in u
  std::uint64_t budget_cells = 20'000'000'000ULL;
  double audit_fraction = 0.01;  // fraction of rows audited with the 2h stencil
  std::uint64_t audit_seed = 1;
  int snapshot_stride = 0;  // 0: no snapshot
  int rows_per_block = 4;   // wavefront depth of the kernel (1, 2 or 4)
  std::vector<double> scri_fractions{1.0, 0.85, 0.7, 0.55};
};

struct Diagnostics {
  std::uint64_t cells = 0;
  std::uint64_t residual_samples = 0;
  double residual_max = 0.0;
  double residual_rms = 0.0;
  int rows_per_block = 1;
  double wall_seconds = 0.0;
};

struct EvolutionResult {
  NullGrid grid;
  std::vector<ObserverSeries> observers;
  std::vector<double> final_row;  // phi(u_max, v_j)
  Diagnostics diagnostics;
  std::optional<GridField> snapshot;  // phi
};

// Diamond-scheme evolution of d_u d_v phi = -V phi over the grid.
EvolutionResult evolve(const CharacteristicData& data, const NullGrid& grid,
                       std::span<const ObserverSpec> observers, const EvolveOptions& options = {});

// psi = phi / r on a stored field.
GridField psi_from_phi(const GridField& phi, const CoordinateMap& map);

struct NpSample {
  double u;
  double v;
  double I0;  // v^2 d_v phi / 2
};

// Newman-Penrose scalar at the largest retained v for each requested u.
std::vector<NpSample> sample_np_scalar(const EvolutionResult& run, std::span<const double> u_list);

}  // namespace nptails
