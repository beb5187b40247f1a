#ifndef INTERLACE_QUADRATURE_HPP_
#define INTERLACE_QUADRATURE_HPP_

#include <cmath>
#include <queue>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "interlace/errors.hpp"

namespace interlace::quad {

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel &o) const { return error < o.error; }
};

struct Result {
  double value = 0.0;
  double error = 0.0;
  int panels = 0;
};

template <class F>
Panel gk15_panel(F &f, double a, double b) {
  using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
  using G = boost::math::quadrature::gauss<double, 7>;
  // Nonnegative abscissae; even Kronrod indices are the Gauss nodes.
  const auto &x = GK::abscissa();
  const auto &wk = GK::weights();
  const auto &wg = G::weights();
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double f0 = f(mid);
  double kronrod = wk[0] * f0;
  double gauss = wg[0] * f0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double fsum = f(mid - half * x[i]) + f(mid + half * x[i]);
    kronrod += wk[i] * fsum;
    if (i % 2 == 0) gauss += wg[i / 2] * fsum;
  }
  return {a, b, kronrod * half, std::fabs((kronrod - gauss) * half)};
}

/// Globally adaptive Gauss-Kronrod (7/15) quadrature over the given
/// breakpoints: the panel with the largest error estimate is bisected until
/// the summed estimate drops below abs_tol. Throws NumericalError when the
/// panel budget is exhausted first.
template <class F>
Result adaptive(F f, const std::vector<double> &breaks, double abs_tol,
                int max_panels = 20000) {
  std::priority_queue<Panel> heap;
  double total_err = 0.0;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    Panel p = gk15_panel(f, breaks[i], breaks[i + 1]);
    total_err += p.error;
    heap.push(p);
  }
  int count = static_cast<int>(heap.size());
  while (total_err > abs_tol) {
    if (count >= max_panels) {
      throw NumericalError("quadrature did not reach tolerance " +
                           std::to_string(abs_tol) + " (estimate " +
                           std::to_string(total_err) + ")");
    }
    Panel worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    Panel left = gk15_panel(f, worst.a, mid);
    Panel right = gk15_panel(f, mid, worst.b);
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++count;
  }
  Result r;
  r.error = 0.0;
  r.panels = count;
  // Sum small contributions first.
  std::vector<Panel> all;
  all.reserve(heap.size());
  while (!heap.empty()) {
    all.push_back(heap.top());
    heap.pop();
  }
  for (auto it = all.rbegin(); it != all.rend(); ++it) {
    r.value += it->value;
    r.error += it->error;
  }
  return r;
}

}  // namespace interlace::quad

#endif  // INTERLACE_QUADRATURE_HPP_
