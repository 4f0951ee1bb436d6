#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <span>
#include <vector>

namespace nptails {

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
};

namespace detail {

inline constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the 7-point rule embedded at the odd Kronrod nodes.
inline constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

}  // namespace detail

// One 15-point Gauss-Kronrod panel; error is |K15 - G7|.
template <class F>
QuadratureResult gauss_kronrod15(F&& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double hw = 0.5 * (b - a);
  const double fc = f(c);
  double k = fc * detail::kKronrodWeights[7];
  double g = fc * detail::kGaussWeights[3];
  for (int i = 0; i < 7; ++i) {
    const double dx = hw * detail::kKronrodNodes[i];
    const double s = f(c - dx) + f(c + dx);
    k += detail::kKronrodWeights[i] * s;
    if (i % 2 == 1) g += detail::kGaussWeights[i / 2] * s;
  }
  return {k * hw, std::abs((k - g) * hw), 15};
}

// Globally adaptive bisection: always splits the panel with the largest error
// until the summed error meets max(abs_tol, rel_tol*|I|).
template <class F>
QuadratureResult integrate_adaptive(F&& f, double a, double b, double abs_tol,
                                    double rel_tol, int max_panels = 4000) {
  if (a == b) return {};
  struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
  };
  std::priority_queue<Panel> heap;
  QuadratureResult first = gauss_kronrod15(f, a, b);
  heap.push({a, b, first.value, first.error});
  double total = first.value;
  double err = first.error;
  int evals = first.evaluations;
  int panels = 1;
  while (err > std::max(abs_tol, rel_tol * std::abs(total)) && panels < max_panels) {
    Panel p = heap.top();
    heap.pop();
    const double m = 0.5 * (p.a + p.b);
    if (!(m > p.a && m < p.b)) {  // panel cannot be split further
      heap.push(p);
      break;
    }
    QuadratureResult l = gauss_kronrod15(f, p.a, m);
    QuadratureResult r = gauss_kronrod15(f, m, p.b);
    evals += 30;
    total += l.value + r.value - p.value;
    err += l.error + r.error - p.error;
    heap.push({p.a, m, l.value, l.error});
    heap.push({m, p.b, r.value, r.error});
    ++panels;
  }
  // Re-sum from the panels to shed the running-update roundoff.
  double sum = 0.0, esum = 0.0;
  while (!heap.empty()) {
    sum += heap.top().value;
    esum += heap.top().error;
    heap.pop();
  }
  return {sum, esum, evals};
}

// Integrates over consecutive breakpoints, each sub-interval adaptively.
template <class F>
QuadratureResult integrate_piecewise(F&& f, std::span<const double> breaks, double abs_tol,
                                     double rel_tol) {
  QuadratureResult out;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    QuadratureResult r = integrate_adaptive(f, breaks[i], breaks[i + 1], abs_tol, rel_tol);
    out.value += r.value;
    out.error += r.error;
    out.evaluations += r.evaluations;
  }
  return out;
}

// Gauss-Legendre rule on [-1, 1].
class GaussLegendre {
 public:
  explicit GaussLegendre(int n);

  int size() const { return static_cast<int>(nodes_.size()); }
  const std::vector<double>& nodes() const { return nodes_; }
  const std::vector<double>& weights() const { return weights_; }

  template <class F>
  double integrate(F&& f, double a, double b) const {
    const double c = 0.5 * (a + b), hw = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) s += weights_[i] * f(c + hw * nodes_[i]);
    return s * hw;
  }

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

// Sorted, deduplicated breakpoints restricted to [a, b], including both ends.
std::vector<double> merge_breakpoints(double a, double b, std::span<const double> extra);

}  // namespace nptails
