#include "nptails/evolution.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <random>

#include "nptails/error.hpp"

namespace nptails {

namespace {

[[noreturn]] void fail(ErrorCode code, const std::string& msg) {
  throw Error(code, "evolution", msg);
}

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

int integral_steps(double span, double h, const char* what) {
  const double n = span / h;
  const double k = std::round(n);
  if (k < 1.0 || std::abs(n - k) > 1e-9 * std::max(1.0, k))
    fail(ErrorCode::InvalidArgument, std::string(what) + " is not an integer multiple of h");
  if (k > std::numeric_limits<int>::max() / 2) fail(ErrorCode::InvalidArgument, "grid too large");
  return static_cast<int>(k);
}

// Four-point Lagrange interpolation (value and v-derivative) of a row.
struct RowSample {
  double value, derivative;
};

RowSample interpolate_row(const std::vector<double>& row, double v0, double h, double v) {
  const int nv = static_cast<int>(row.size()) - 1;
  const double x = (v - v0) / h;
  int j0 = static_cast<int>(std::floor(x)) - 1;
  j0 = std::clamp(j0, 0, nv - 3);
  const double t = x - j0;  // nodes at t = 0, 1, 2, 3
  const double y0 = row[j0], y1 = row[j0 + 1], y2 = row[j0 + 2], y3 = row[j0 + 3];
  const double l0 = -(t - 1) * (t - 2) * (t - 3) / 6.0;
  const double l1 = t * (t - 2) * (t - 3) / 2.0;
  const double l2 = -t * (t - 1) * (t - 3) / 2.0;
  const double l3 = t * (t - 1) * (t - 2) / 6.0;
  const double d0 = -((t - 2) * (t - 3) + (t - 1) * (t - 3) + (t - 1) * (t - 2)) / 6.0;
  const double d1 = ((t - 2) * (t - 3) + t * (t - 3) + t * (t - 2)) / 2.0;
  const double d2 = -((t - 1) * (t - 3) + t * (t - 3) + t * (t - 1)) / 2.0;
  const double d3 = ((t - 1) * (t - 2) + t * (t - 2) + t * (t - 1)) / 6.0;
  return {l0 * y0 + l1 * y1 + l2 * y2 + l3 * y3, (d0 * y0 + d1 * y1 + d2 * y2 + d3 * y3) / h};
}

// Cubic through (1/v_k, y_k) evaluated at 1/v = 0.
double richardson_in_inverse_v(const double* v, const double* y, int n) {
  double x[8], p[8];
  for (int i = 0; i < n; ++i) {
    x[i] = 1.0 / v[i];
    p[i] = y[i];
  }
  for (int k = 1; k < n; ++k)
    for (int i = 0; i + k < n; ++i) p[i] = (x[i + k] * p[i] - x[i] * p[i + 1]) / (x[i + k] - x[i]);
  return p[0];
}

// v - v^alpha = u by Newton from v = u + u^alpha.
double gamma_v(double alpha, double u) {
  double v = std::max(u + std::pow(std::max(u, 1.0), alpha), 1.0);
  for (int it = 0; it < 60; ++it) {
    const double f = v - std::pow(v, alpha) - u;
    const double df = 1.0 - alpha * std::pow(v, alpha - 1.0);
    const double dv = f / df;
    v -= dv;
    if (std::abs(dv) <= 1e-15 * v) break;
  }
  return v;
}

class ObserverState {
 public:
  ObserverState(const ObserverSpec& spec, const CoordinateMap& map, const NullGrid& grid,
                const EvolveOptions& opt)
      : spec_(spec), map_(map), grid_(grid) {
    series_.spec = spec;
    switch (spec.kind) {
      case CurveKind::ConstantR:
        if (!(spec.value > map.model().r_min()))
          fail(ErrorCode::InvalidArgument, "observer radius below r_min");
        rstar_ = map.tortoise(spec.value);
        r_ = spec.value;
        break;
      case CurveKind::ConstantRstar:
        rstar_ = spec.value;
        r_ = map.inverse_tortoise(spec.value);
        break;
      case CurveKind::GammaAlpha:
        if (!(spec.value > 2.0 / 3.0 && spec.value < 1.0))
          fail(ErrorCode::InvalidArgument, "gamma_alpha needs alpha in (2/3, 1)");
        break;
      case CurveKind::Scri: {
        for (double f : opt.scri_fractions) {
          const int j = static_cast<int>(std::round((f * grid.v_max - grid.v0) / grid.h));
          if (j < 0 || j > grid.nv) fail(ErrorCode::InvalidArgument, "scri column outside grid");
          columns_.push_back(j);
        }
        if (columns_.size() < 2 || columns_.size() > 8 || columns_.front() != grid.nv || grid.nv < 2)
          fail(ErrorCode::InvalidArgument, "scri extrapolation needs the v_max column first");
        break;
      }
    }
    if (spec.kind == CurveKind::ConstantR || spec.kind == CurveKind::ConstantRstar) {
      const double vlo = grid.v0 + 2.0 * rstar_;
      if (vlo > grid.v_max) fail(ErrorCode::InvalidArgument, "observer curve misses the grid");
    }
  }

  void sample(int i, const std::vector<double>& row) {
    const double u = grid_.u(i);
    ObserverSample s{u, u, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN};
    switch (spec_.kind) {
      case CurveKind::ConstantR:
      case CurveKind::ConstantRstar: {
        const double v = u + 2.0 * rstar_;
        if (v < grid_.v0 || v > grid_.v_max) return;
        const RowSample p = interpolate_row(row, grid_.v0, grid_.h, v);
        s.v = v;
        s.r = r_;
        s.phi = p.value;
        s.v2dvphi = v * v * p.derivative;
        break;
      }
      case CurveKind::GammaAlpha: {
        const double v = gamma_v(spec_.value, u);
        if (v < grid_.v0 || v > grid_.v_max) return;
        const RowSample p = interpolate_row(row, grid_.v0, grid_.h, v);
        s.v = v;
        s.r = map_.inverse_tortoise(0.5 * (v - u));
        s.phi = p.value;
        s.v2dvphi = v * v * p.derivative;
        break;
      }
      case CurveKind::Scri: {
        double vs[8], ys[8];
        const int n = static_cast<int>(columns_.size());
        for (int k = 0; k < n; ++k) {
          vs[k] = grid_.v(columns_[k]);
          ys[k] = row[columns_[k]];
        }
        const int N = grid_.nv;
        const double vN = grid_.v(N);
        s.v = vN;
        s.r = map_.inverse_tortoise(0.5 * (vN - u));
        s.phi = richardson_in_inverse_v(vs, ys, n);
        s.v2dvphi = vN * vN * (3.0 * row[N] - 4.0 * row[N - 1] + row[N - 2]) / (2.0 * grid_.h);
        break;
      }
    }
    s.psi = spec_.kind == CurveKind::Scri ? row[grid_.nv] / s.r : s.phi / s.r;
    series_.samples.push_back(s);
  }

  ObserverSeries finish() {
    auto& x = series_.samples;
    for (std::size_t k = 1; k + 1 < x.size(); ++k) {
      const double du = 0.5 * (x[k + 1].u - x[k - 1].u);
      x[k].Tpsi = (x[k + 1].psi - x[k - 1].psi) / (2.0 * du);
      x[k].T2psi = (x[k + 1].psi - 2.0 * x[k].psi + x[k - 1].psi) / (du * du);
    }
    return std::move(series_);
  }

 private:
  ObserverSpec spec_;
  const CoordinateMap& map_;
  const NullGrid& grid_;
  double rstar_ = 0.0, r_ = 0.0;
  std::vector<int> columns_;
  ObserverSeries series_;
};

// B u steps of the diamond scheme in place, as a wavefront: at sweep
// position t, level k advances row i + k + 1 at column j = t - k, taking its
// east value from level k - 1 one column ahead. Each cell sees exactly the
// operations of the single-row sweep, so results are bitwise identical.
//
// The update carries the u-increment d = phi(u+h, v) - phi(u, v) along the
// row, d <- d - c (phi_S + phi_E + d), and stores phi_E + d. Rounding of the
// stored phi then only feeds back through c phi; summing phi_W - phi_S
// instead lets the O(1) values near the initial pulse inject a random walk
// of size eps into every later row.
//
// On entry row holds phi(u_i, .), on exit phi(u_{i+B}, .). cp[k][j] is
// h^2 V / 2 at the centre of cell j in level k; rays[k] = phi(u_{i+k+1}, v0).
template <int B>
[[gnu::always_inline]] inline void sweep(double* row, const double* const* cp, int nv,
                                         const double* rays) {
  double d[B], s[B], o[B];
  for (int k = 0; k < B; ++k) {
    s[k] = k == 0 ? row[0] : rays[k - 1];
    d[k] = rays[k] - s[k];
    o[k] = rays[k];
  }
  auto cell = [&](int k, int j, double e) {
    const double c = cp[k][j];
    const double dn = std::fma(-c, (s[k] + e) + d[k], d[k]);
    s[k] = e;
    d[k] = dn;
    o[k] = e + dn;
  };
  // Levels are visited from the last down so o[k - 1] is still last step's value.
  auto step = [&](int t, int klo, int khi) {
    for (int k = khi; k >= klo; --k) {
      const int j = t - k;
      cell(k, j, k == 0 ? row[j + 1] : o[k > 0 ? k - 1 : 0]);
      if (k == B - 1) row[j + 1] = o[k];
    }
  };
  const int ramp = std::min(B - 1, nv);
  for (int t = 0; t < ramp; ++t) step(t, 0, t);
  for (int t = B - 1; t < nv; ++t) {
#pragma GCC unroll 4
    for (int k = B - 1; k >= 0; --k) {
      const int j = t - k;
      cell(k, j, k == 0 ? row[j + 1] : o[k > 0 ? k - 1 : 0]);
    }
    row[t - B + 2] = o[B - 1];
  }
  for (int t = std::max(nv, B - 1); t < nv + B - 1; ++t) step(t, t - nv + 1, B - 1);
  row[0] = rays[B - 1];
}

__attribute__((target_clones("fma", "default"))) void advance_rows(int B, double* row,
                                                                     const double* const* cp,
                                                                     int nv, const double* rays) {
  switch (B) {
    case 4: sweep<4>(row, cp, nv, rays); break;
    case 2: sweep<2>(row, cp, nv, rays); break;
    default: sweep<1>(row, cp, nv, rays); break;
  }
}

void scan_for_nan(const std::vector<double>& row, const NullGrid& grid, int i) {
  for (std::size_t j = 0; j < row.size(); ++j)
    if (!std::isfinite(row[j]))
      fail(ErrorCode::NaNDetected, "non-finite phi at u = " + std::to_string(grid.u(i)) +
                                       ", v = " + std::to_string(grid.v(static_cast<int>(j))));
}

}  // namespace

NullGrid make_grid(double h, double u_max, double v0, double v_max) {
  if (!(h > 0.0) || !std::isfinite(h)) fail(ErrorCode::InvalidArgument, "h must be positive");
  NullGrid g;
  g.h = h;
  g.u_max = u_max;
  g.v0 = v0;
  g.v_max = v_max;
  g.nu = integral_steps(u_max, h, "u_max");
  g.nv = integral_steps(v_max - v0, h, "v_max - v0");
  return g;
}

const char* to_string(CurveKind kind) noexcept {
  switch (kind) {
    case CurveKind::ConstantR: return "constant_r";
    case CurveKind::ConstantRstar: return "constant_rstar";
    case CurveKind::Scri: return "scri";
    case CurveKind::GammaAlpha: return "gamma_alpha";
  }
  return "unknown";
}

CurveKind curve_kind_from_string(const std::string& name) {
  if (name == "constant_r") return CurveKind::ConstantR;
  if (name == "constant_rstar") return CurveKind::ConstantRstar;
  if (name == "scri" || name == "scri_proxy") return CurveKind::Scri;
  if (name == "gamma_alpha") return CurveKind::GammaAlpha;
  fail(ErrorCode::InvalidArgument, "unknown observer kind '" + name + "'");
}

namespace {
std::string number_id(const char* prefix, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%g", prefix, x);
  return buf;
}
}  // namespace

ObserverSpec constant_r(double r) { return {CurveKind::ConstantR, r, number_id("r", r)}; }
ObserverSpec constant_rstar(double rstar) {
  return {CurveKind::ConstantRstar, rstar, number_id("rstar", rstar)};
}
ObserverSpec scri_proxy() { return {CurveKind::Scri, 0.0, "scri"}; }
ObserverSpec gamma_alpha(double alpha) {
  return {CurveKind::GammaAlpha, alpha, number_id("gamma", alpha)};
}

EvolutionResult evolve(const CharacteristicData& data, const NullGrid& grid,
                       std::span<const ObserverSpec> observers, const EvolveOptions& opt) {
  const auto t_start = std::chrono::steady_clock::now();
  const CoordinateMap& map = *data.map;
  const SpacetimeModel& model = map.model();
  if (grid.nu < 1 || grid.nv < 3) fail(ErrorCode::InvalidArgument, "grid needs nu >= 1, nv >= 3");
  if (std::abs(grid.v0 - data.v0) > 1e-12 * std::max(1.0, std::abs(data.v0)))
    fail(ErrorCode::GridMismatch, "grid v0 differs from the data vertex");
  if (grid.cells() > opt.budget_cells)
    fail(ErrorCode::BudgetExceeded, "grid has " + std::to_string(grid.cells()) +
                                        " cells, budget " + std::to_string(opt.budget_cells));
  const double h = grid.h;
  const int nu = grid.nu, nv = grid.nv;
  const int stride = std::max(1, static_cast<int>(std::lround(opt.sample_dt / h)));

  // c_d = h^2 V / 2 on the diagonal v - u = v0 + d h, stored at index d + nu.
  std::vector<double> V(static_cast<std::size_t>(nu) + nv + 1), coef(V.size());
  const bool flat_s_wave = model.kind() == ModelKind::Minkowski && data.ell == 0;
  for (int d = -nu; d <= nv; ++d) {
    const double rs = 0.5 * (grid.v0 + d * h);
    double Vd;
    if (!model.has_horizon() && rs <= map.rstar_floor()) {
      if (!flat_s_wave)
        fail(ErrorCode::TableDomainExceeded,
             "grid reaches past the centre r = 0; shrink u_max below v0 or use the flat s-wave");
      Vd = 0.0;
    } else {
      Vd = map.potential_at_rstar(data.ell, rs);
    }
    V[d + nu] = Vd;
    coef[d + nu] = 0.5 * h * h * Vd;
  }

  std::vector<double> row(static_cast<std::size_t>(nv) + 1);
  for (int j = 0; j <= nv; ++j) row[j] = data.cone->phi_v(grid.v(j));
  row[0] = data.ray_at_u(0.0);

  std::vector<ObserverState> obs;
  obs.reserve(observers.size());
  for (const auto& s : observers) obs.emplace_back(s, map, grid, opt);

  EvolutionResult result;
  result.grid = grid;
  Diagnostics& diag = result.diagnostics;

  std::optional<GridField> snap;
  if (opt.snapshot_stride > 0) {
    const int st = opt.snapshot_stride;
    if (nu % st != 0 || nv % st != 0)
      fail(ErrorCode::GridMismatch, "snapshot stride must divide both step counts");
    snap.emplace();
    snap->h = h * st;
    snap->v0 = grid.v0;
    snap->stride = st;
    snap->nu = nu / st;
    snap->nv = nv / st;
    snap->values.assign(static_cast<std::size_t>(snap->nu + 1) * (snap->nv + 1), 0.0);
  }
  auto store_snapshot = [&](int i) {
    if (!snap || i % snap->stride != 0) return;
    const int si = i / snap->stride;
    for (int sj = 0; sj <= snap->nv; ++sj) snap->at(si, sj) = row[sj * snap->stride];
  };

  // Rows that must exist in memory: samples, snapshots, and both ends of each
  // audited 2h diamond. Wavefront blocks never step over one of them.
  std::vector<char> audit_row(static_cast<std::size_t>(nu) + 1, 0), keep(audit_row.size(), 0);
  {
    std::mt19937_64 rng(opt.audit_seed);
    std::bernoulli_distribution pick(std::clamp(opt.audit_fraction, 0.0, 1.0));
    for (int i = 0; i + 2 <= nu; ++i)
      if (pick(rng)) audit_row[i] = keep[i] = keep[i + 2] = 1;
    for (int i = 0; i <= nu; ++i)
      if (i % stride == 0 || i == nu || (snap && i % snap->stride == 0)) keep[i] = 1;
  }
  std::vector<std::pair<int, std::vector<double>>> pending;
  double res_sq = 0.0;
  auto audit = [&](int i) {
    for (auto it = pending.begin(); it != pending.end();) {
      if (it->first + 2 != i) {
        ++it;
        continue;
      }
      const auto& S = it->second;
      const int i0 = it->first;
      for (int j = 0; j + 2 <= nv; ++j) {
        const double Vc = V[j - i0 + nu];
        const double r = (row[j + 2] - S[j + 2] - row[j] + S[j]) / (4.0 * h * h) +
                         0.5 * Vc * (S[j + 2] + row[j]);
        diag.residual_max = std::max(diag.residual_max, std::abs(r));
        res_sq += r * r;
        ++diag.residual_samples;
      }
      it = pending.erase(it);
    }
    if (audit_row[i]) pending.emplace_back(i, row);
  };

  auto visit = [&](int i) {
    if (i % stride == 0 || i == nu) {
      scan_for_nan(row, grid, i);
      for (auto& o : obs) o.sample(i, row);
    }
    store_snapshot(i);
    audit(i);
  };

  const int max_block = opt.rows_per_block >= 4 ? 4 : opt.rows_per_block >= 2 ? 2 : 1;
  visit(0);
  for (int i = 0; i < nu;) {
    int B = max_block;
    for (; B > 1; B /= 2) {
      if (i + B > nu) continue;
      bool clear = true;
      for (int k = 1; k < B; ++k) clear = clear && !keep[i + k];
      if (clear) break;
    }
    const double* cps[4];
    double rays[4];
    for (int k = 0; k < B; ++k) {
      cps[k] = coef.data() + (nu - (i + k));
      rays[k] = data.ray_at_u(grid.u(i + k + 1));
    }
    advance_rows(B, row.data(), cps, nv, rays);
    i += B;
    if (keep[i]) visit(i);
  }

  diag.cells = grid.cells();
  diag.rows_per_block = max_block;
  diag.residual_rms =
      diag.residual_samples ? std::sqrt(res_sq / static_cast<double>(diag.residual_samples)) : 0.0;
  for (auto& o : obs) result.observers.push_back(o.finish());
  result.final_row = std::move(row);
  result.snapshot = std::move(snap);
  diag.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return result;
}

GridField psi_from_phi(const GridField& phi, const CoordinateMap& map) {
  GridField out = phi;
  for (int i = 0; i <= phi.nu; ++i)
    for (int j = 0; j <= phi.nv; ++j) {
      const double rs = 0.5 * (phi.v(j) - phi.u(i));
      if (!map.model().has_horizon() && rs <= map.rstar_floor())
        fail(ErrorCode::TableDomainExceeded, "snapshot point past the centre r = 0");
      out.at(i, j) = phi.at(i, j) / map.inverse_tortoise(rs);
    }
  return out;
}

std::vector<NpSample> sample_np_scalar(const EvolutionResult& run, std::span<const double> u_list) {
  const ObserverSeries* src = nullptr;
  for (const auto& o : run.observers)
    if (o.spec.kind == CurveKind::Scri) src = &o;
  if (!src)
    for (const auto& o : run.observers)
      if (o.spec.kind == CurveKind::GammaAlpha) src = &o;
  if (!src || src->samples.empty())
    fail(ErrorCode::ColumnNotRetained, "run kept neither the v_max column nor a gamma_alpha curve");
  const auto& x = src->samples;
  std::vector<NpSample> out;
  out.reserve(u_list.size());
  for (double u : u_list) {
    if (u < x.front().u - 1e-12 || u > x.back().u + 1e-12)
      fail(ErrorCode::ColumnNotRetained, "u = " + std::to_string(u) + " outside the sampled range");
    auto it = std::lower_bound(x.begin(), x.end(), u,
                               [](const ObserverSample& s, double q) { return s.u < q; });
    if (it == x.end()) it = x.end() - 1;
    if (it != x.begin() && std::abs(std::prev(it)->u - u) < std::abs(it->u - u)) --it;
    if (std::abs(it->u - u) <= 1e-9 * std::max(1.0, u)) {
      out.push_back({it->u, it->v, 0.5 * it->v2dvphi});
      continue;
    }
    // Linear interpolation between neighbouring samples.
    auto hi = std::upper_bound(x.begin(), x.end(), u,
                               [](double q, const ObserverSample& s) { return q < s.u; });
    auto lo = std::prev(hi);
    const double t = (u - lo->u) / (hi->u - lo->u);
    out.push_back({u, lo->v + t * (hi->v - lo->v),
                   0.5 * (lo->v2dvphi + t * (hi->v2dvphi - lo->v2dvphi))});
  }
  return out;
}

}  // namespace nptails
