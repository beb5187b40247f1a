#ifndef INTERLACE_BESSEL_HPP_
#define INTERLACE_BESSEL_HPP_

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace interlace::bessel {

/// Below this argument (relative to the order) the Hankel expansion is not
/// used; Miller's recurrence takes over.
inline double hankel_threshold(int order) {
  const double n = order;
  return std::max(40.0, 4.0 * n * n);
}

/// Coefficients b_k of e^{-z} I_n(z) ~ (2 pi z)^{-1/2} sum_k b_k z^{-k}.
inline std::vector<double> hankel_coefficients(int order, int terms) {
  std::vector<double> b(static_cast<std::size_t>(terms));
  const double mu = 4.0 * order * order;
  b[0] = 1.0;
  for (int k = 1; k < terms; ++k) {
    const double odd = 2.0 * k - 1.0;
    b[static_cast<std::size_t>(k)] =
        b[static_cast<std::size_t>(k - 1)] * (-(mu - odd * odd)) / (8.0 * k);
  }
  return b;
}

/// e^{-z} I_n(z) from the large-argument expansion; requires
/// z >= hankel_threshold(n).
inline double scaled_i_hankel(int order, double z) {
  const double mu = 4.0 * order * order;
  double term = 1.0;
  double sum = 1.0;
  double prev = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    term *= -(mu - odd * odd) / (8.0 * k * z);
    const double mag = std::fabs(term);
    if (mag > prev) break;  // asymptotic series started to diverge
    sum += term;
    if (mag < 1e-18 * std::fabs(sum)) break;
    prev = mag;
  }
  return sum / std::sqrt(2.0 * std::numbers::pi * z);
}

/// Fills out[k] = e^{-z} I_k(z) for k = 0..out.size()-1 by Miller's downward
/// recurrence normalised with e^{-z}(I_0 + 2 sum_k I_k) = 1.
inline void scaled_i_miller(double z, std::span<double> out) {
  const int nmax = static_cast<int>(out.size()) - 1;
  if (z == 0.0) {
    std::fill(out.begin(), out.end(), 0.0);
    out[0] = 1.0;
    return;
  }
  const int start =
      nmax + 30 + static_cast<int>(std::ceil(15.0 * std::sqrt(z)));
  constexpr double kBig = 1e250;
  double next = 0.0;      // b_{k+1}
  double cur = 1e-280;    // b_k
  double sum = 0.0;       // 2 * sum_{j>k} b_j
  const double two_over_z = 2.0 / z;
  for (int k = start; k >= 1; --k) {
    if (k <= nmax) out[static_cast<std::size_t>(k)] = cur;
    sum += 2.0 * cur;
    const double prev = next + k * two_over_z * cur;  // b_{k-1}
    next = cur;
    cur = prev;
    if (std::fabs(cur) > kBig) {
      const double s = 1.0 / kBig;
      cur *= s;
      next *= s;
      sum *= s;
      for (int j = std::max(k, 1); j <= nmax; ++j)
        out[static_cast<std::size_t>(j)] *= s;
    }
  }
  out[0] = cur;
  sum += cur;
  const double inv = 1.0 / sum;
  for (auto &v : out) v *= inv;
}

/// e^{-z} I_n(z) for a single integer order n >= 0.
inline double scaled_i(int order, double z) {
  order = std::abs(order);
  if (z >= hankel_threshold(order)) return scaled_i_hankel(order, z);
  std::vector<double> buf(static_cast<std::size_t>(order) + 1);
  scaled_i_miller(z, buf);
  return buf.back();
}

}  // namespace interlace::bessel

#endif  // INTERLACE_BESSEL_HPP_
