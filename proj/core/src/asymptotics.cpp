#include "nptails/asymptotics.hpp"

#include <algorithm>
#include <cmath>

#include "nptails/error.hpp"

namespace nptails {

namespace {

[[noreturn]] void fail(ErrorCode code, const std::string& msg) {
  throw Error(code, "asymptotics", msg);
}

constexpr int kPerDecade = 40;

// Samples with |y| above this are signal; below it ratios of y are noise.
double noise_threshold(std::span<const double> y) {
  double m = 0.0;
  for (double v : y)
    if (std::isfinite(v)) m = std::max(m, std::abs(v));
  return 1e-13 * m;
}

double lagrange4(const double* x, const double* y, double q) {
  double s = 0.0;
  for (int i = 0; i < 4; ++i) {
    double l = 1.0;
    for (int j = 0; j < 4; ++j)
      if (j != i) l *= (q - x[j]) / (x[i] - x[j]);
    s += l * y[i];
  }
  return s;
}

// Least squares by modified Gram-Schmidt with one reorthogonalization pass.
std::vector<double> least_squares(const std::vector<std::vector<double>>& cols,
                                  std::vector<double> b) {
  const std::size_t n = cols.size(), m = b.size();
  std::vector<std::vector<double>> q = cols;
  std::vector<std::vector<double>> r(n, std::vector<double>(n, 0.0));
  for (std::size_t k = 0; k < n; ++k) {
    for (int pass = 0; pass < 2; ++pass)
      for (std::size_t j = 0; j < k; ++j) {
        double d = 0.0;
        for (std::size_t i = 0; i < m; ++i) d += q[j][i] * q[k][i];
        r[j][k] += d;
        for (std::size_t i = 0; i < m; ++i) q[k][i] -= d * q[j][i];
      }
    double nrm = 0.0;
    for (double v : q[k]) nrm += v * v;
    nrm = std::sqrt(nrm);
    if (nrm == 0.0) fail(ErrorCode::InvalidArgument, "degenerate least-squares fit");
    r[k][k] = nrm;
    for (double& v : q[k]) v /= nrm;
  }
  std::vector<double> c(n);
  for (std::size_t k = 0; k < n; ++k) {
    double d = 0.0;
    for (std::size_t i = 0; i < m; ++i) d += q[k][i] * b[i];
    c[k] = d;
  }
  for (std::size_t k = n; k-- > 0;) {
    for (std::size_t j = k + 1; j < n; ++j) c[k] -= r[k][j] * c[j];
    c[k] /= r[k][k];
  }
  return c;
}

int factorial(int n) { return n <= 1 ? 1 : n * factorial(n - 1); }

}  // namespace

std::vector<double> fit_inverse_powers(std::span<const double> tau, std::span<const double> y,
                                       int degree) {
  if (tau.size() != y.size() || static_cast<int>(tau.size()) <= degree)
    fail(ErrorCode::WindowTooShort, "too few samples for the fit");
  const double ref = *std::max_element(tau.begin(), tau.end());
  std::vector<std::vector<double>> cols(degree + 1, std::vector<double>(tau.size()));
  for (std::size_t i = 0; i < tau.size(); ++i) {
    const double x = ref / tau[i];
    double p = 1.0;
    for (int m = 0; m <= degree; ++m, p *= x) cols[m][i] = p;
  }
  return least_squares(cols, std::vector<double>(y.begin(), y.end()));
}

PowerIndex local_power_index(std::span<const double> tau, std::span<const double> y) {
  if (tau.size() != y.size()) fail(ErrorCode::InvalidArgument, "tau and y differ in length");
  const double noise = noise_threshold(y);
  std::vector<double> lt, ly;
  int sign = 0;
  for (std::size_t i = 0; i < tau.size(); ++i) {
    if (!std::isfinite(y[i]) || !(tau[i] > 0.0) || std::abs(y[i]) <= 10.0 * noise) continue;
    const int s = y[i] > 0 ? 1 : -1;
    if (sign != 0 && s != sign)
      fail(ErrorCode::SignChangeInWindow,
           "y changes sign near tau = " + std::to_string(tau[i]));
    sign = s;
    if (!lt.empty() && std::log(tau[i]) <= lt.back())
      fail(ErrorCode::InvalidArgument, "tau must increase");
    lt.push_back(std::log(tau[i]));
    ly.push_back(std::log(std::abs(y[i])));
  }
  PowerIndex out;
  if (lt.size() < 4) return out;
  const double step = std::log(10.0) / kPerDecade;
  const int K = static_cast<int>(std::floor((lt.back() - lt.front()) / step)) + 1;
  if (K < 3) return out;
  std::vector<double> L(K);
  for (int k = 0; k < K; ++k) {
    const double q = lt.front() + k * step;
    std::size_t j = std::upper_bound(lt.begin(), lt.end(), q) - lt.begin();
    std::size_t j0 = j >= 2 ? j - 2 : 0;
    j0 = std::min(j0, lt.size() - 4);
    L[k] = lagrange4(&lt[j0], &ly[j0], q);
  }
  for (int k = 1; k + 1 < K; ++k) {
    out.tau.push_back(std::exp(lt.front() + k * step));
    out.p.push_back(-(L[k + 1] - L[k - 1]) / (2.0 * step));
  }
  // Power laws settle: over the last half of the range p must stay within a
  // band comparable to its size rather than keep growing.
  const std::size_t half = out.p.size() / 2;
  if (out.p.size() >= 4) {
    const auto [mn, mx] = std::minmax_element(out.p.begin() + half, out.p.end());
    double mean = 0.0;
    for (std::size_t i = half; i < out.p.size(); ++i) mean += out.p[i];
    mean /= static_cast<double>(out.p.size() - half);
    out.power_law = (*mx - *mn) <= 0.5 * std::abs(mean) + 0.5;
  }
  return out;
}

const char* to_string(Scenario s) noexcept {
  switch (s) {
    case Scenario::InteriorZeroNP: return "interior_zeroNP";
    case Scenario::FarfieldZeroNP: return "farfield_zeroNP";
    case Scenario::ScriZeroNP: return "scri_zeroNP";
    case Scenario::HorizonZeroNP: return "horizon_zeroNP";
    case Scenario::InteriorNonzeroNP: return "interior_nonzeroNP";
    case Scenario::ScriTk: return "scri_Tk";
    case Scenario::HigherOrder: return "higher_order";
    case Scenario::NpScalar: return "np_scalar";
  }
  return "unknown";
}

Scenario scenario_from_string(const std::string& name) {
  for (Scenario s : {Scenario::InteriorZeroNP, Scenario::FarfieldZeroNP, Scenario::ScriZeroNP,
                     Scenario::HorizonZeroNP, Scenario::InteriorNonzeroNP, Scenario::ScriTk,
                     Scenario::HigherOrder, Scenario::NpScalar})
    if (name == to_string(s)) return s;
  fail(ErrorCode::InvalidArgument, "unknown scenario '" + name + "'");
}

Target scenario_target(Scenario s, int k) {
  if (k < 0) fail(ErrorCode::InvalidArgument, "k must be nonnegative");
  const double sgn = (k % 2 == 0) ? 1.0 : -1.0;
  switch (s) {
    case Scenario::InteriorZeroNP:
    case Scenario::HorizonZeroNP:
      // T^k of -8 I0^(1) tau^-3.
      if (k == 0) return {3.0, -8.0, 1, "-8*I0^(1)"};
      return {k + 3.0, -4.0 * sgn * factorial(k + 2), 1,
              "-4*(-1)^" + std::to_string(k) + "*" + std::to_string(k + 2) + "!*I0^(1)"};
    case Scenario::FarfieldZeroNP: return {3.0, -4.0, 1, "-4*I0^(1) (1+u/v)/(u^2 v)"};
    case Scenario::ScriZeroNP: return {2.0, -2.0, 1, "-2*I0^(1)"};
    case Scenario::InteriorNonzeroNP:
      return {k + 2.0, 4.0 * sgn * factorial(k + 1), 0,
              "4*(-1)^" + std::to_string(k) + "*" + std::to_string(k + 1) + "!*I0"};
    case Scenario::ScriTk:
      return {k + 1.0, 2.0 * sgn * factorial(k), 0,
              "(-1)^" + std::to_string(k) + "*" + std::to_string(k) + "!*2*I0"};
    case Scenario::HigherOrder: return {4.0, 24.0, 2, "24*I0^(2)"};
    case Scenario::NpScalar: return {0.0, 2.0, 0, "2*I0"};
  }
  fail(ErrorCode::InvalidArgument, "unknown scenario");
}

TailFit extrapolate_and_compare(const FitInput& in, const NpReport& report, Scenario scenario,
                                int k, const FitOptions& opt) {
  const Target tg = scenario_target(scenario, k);
  double constant;
  if (tg.constant_order == 0) {
    constant = report.I0.value;
  } else {
    const InvertedConstant* c = report.order(tg.constant_order);
    if (!c)
      fail(ErrorCode::MissingConstant, std::string(to_string(scenario)) + " needs I0^(" +
                                           std::to_string(tg.constant_order) + ")");
    constant = c->value;
  }
  if (scenario == Scenario::FarfieldZeroNP && in.v.size() != in.tau.size())
    fail(ErrorCode::InvalidArgument, "farfield fit needs v for every sample");

  TailFit f;
  f.curve_id = in.curve_id;
  f.field_id = in.field_id;
  f.scenario = scenario;
  f.k = k;
  f.p_theory = tg.exponent;
  f.target = tg.coefficient * constant;
  f.formula = tg.formula;
  f.relative = f.target != 0.0;

  // The record must span a decade in tau; fits then use the samples after
  // the last sign change of the signal.
  const double noise = noise_threshold(in.y);
  std::vector<std::size_t> idx;
  double first = 0.0;
  int sign = 0;
  for (std::size_t i = 0; i < in.tau.size(); ++i) {
    if (!std::isfinite(in.y[i]) || !(in.tau[i] > 0.0)) continue;
    if (first == 0.0) first = in.tau[i];
    if (std::abs(in.y[i]) > 10.0 * noise) {
      const int s = in.y[i] > 0 ? 1 : -1;
      if (sign != 0 && s != sign) idx.clear();
      sign = s;
    }
    idx.push_back(i);
  }
  const std::string where = in.curve_id + "/" + in.field_id;
  if (idx.empty() || in.tau[idx.back()] < 10.0 * first)
    fail(ErrorCode::WindowTooShort, where + ": record spans less than one decade in tau");
  if (idx.size() < 8)
    fail(ErrorCode::WindowTooShort, where + ": fewer than 8 samples after the last sign change");
  std::vector<double> t, y;
  for (std::size_t i : idx) {
    t.push_back(in.tau[i]);
    y.push_back(in.y[i]);
  }
  const double t_end = t.back();

  f.index = local_power_index(t, y);
  f.window_lo = std::max(opt.exponent_lo * t_end, t.front());
  f.window_hi = opt.exponent_hi * t_end;
  std::vector<double> pt, pv;
  for (std::size_t i = 0; i < f.index.tau.size(); ++i)
    if (f.index.tau[i] >= f.window_lo && f.index.tau[i] <= f.window_hi) {
      pt.push_back(f.index.tau[i]);
      pv.push_back(f.index.p[i]);
    }
  if (pt.size() < 4)
    fail(ErrorCode::WindowTooShort, where + ": exponent window holds fewer than 4 index points");
  const double p1 = fit_inverse_powers(pt, pv, 1)[0];
  const double p2 = fit_inverse_powers(pt, pv, 2)[0];
  f.p_inf = {p1, std::abs(p1 - p2)};

  f.amp_window_hi = t_end;
  f.amp_window_lo = std::max(t_end * std::pow(10.0, -opt.amplitude_decades), t.front());
  std::vector<double> at, az;
  for (std::size_t n = 0; n < idx.size(); ++n) {
    if (t[n] < f.amp_window_lo) continue;
    double z;
    if (scenario == Scenario::FarfieldZeroNP) {
      const double u = t[n], v = in.v[idx[n]];
      z = y[n] * u * u * v / (1.0 + u / v);
    } else {
      z = y[n] * std::pow(t[n], tg.exponent);
    }
    at.push_back(t[n]);
    az.push_back(z);
  }
  const double a1 = fit_inverse_powers(at, az, 1)[0];
  const double a2 = fit_inverse_powers(at, az, 2)[0];
  f.amplitude = {a1, std::abs(a1 - a2)};
  f.deviation = f.relative ? std::abs(a1 - f.target) / std::abs(f.target) : std::abs(a1);
  return f;
}

}  // namespace nptails
