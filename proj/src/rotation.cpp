#include "twinfock/rotation.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace twinfock {

void pi2_weights(int j, std::vector<double>& w) {
  if (j < 0) throw std::invalid_argument("spin j must be non-negative");
  const auto size = static_cast<std::size_t>(2 * j + 1);
  w.assign(size, 0.0);
  const double jj = static_cast<double>(j) * (j + 1);
  // |c_{m+1}|^2 / |c_{m-1}|^2 = (j(j+1) - m(m-1)) / (j(j+1) - m(m+1)),
  // started at m = 0 (j even) or m = 1 (j odd) and mirrored. The ratios
  // exceed 1 and their product grows only like sqrt(j).
  const int m0 = j % 2;
  w[static_cast<std::size_t>(m0 + j)] = 1.0;
  for (int m = m0 + 1; m + 1 <= j; m += 2) {
    const double r = (jj - m * (m - 1.0)) / (jj - m * (m + 1.0));
    w[static_cast<std::size_t>(m + 1 + j)] = w[static_cast<std::size_t>(m - 1 + j)] * r;
  }
  for (int m = 1; m <= j; ++m) w[static_cast<std::size_t>(j - m)] = w[static_cast<std::size_t>(j + m)];
}

std::vector<double> pi2_distribution(int j) {
  std::vector<double> p;
  pi2_weights(j, p);
  double total = 0.0;
  for (double x : p) total += x;
  for (double& x : p) x /= total;
  return p;
}

TridiagonalOperator gauge_jy(int j) {
  if (j < 0) throw std::invalid_argument("spin j must be non-negative");
  TridiagonalOperator op;
  op.diagonal.assign(static_cast<std::size_t>(2 * j + 1), 0.0);
  op.off_diagonal.resize(static_cast<std::size_t>(2 * j));
  for (int m = -j; m < j; ++m)
    op.off_diagonal[static_cast<std::size_t>(m + j)] = -0.5 * std::sqrt(j * (j + 1.0) - m * (m + 1.0));
  return op;
}

std::vector<double> pi2_distribution(std::span<const cplx> sector_amplitudes,
                                     const KrylovOptions& options) {
  const std::size_t size = sector_amplitudes.size();
  if (size == 0 || size % 2 == 0) throw std::invalid_argument("sector amplitudes need odd length 2j + 1");
  const int j = static_cast<int>(size / 2);
  const TridiagonalOperator jy = gauge_jy(j);
  KrylovPropagator prop(options);
  std::vector<double> p(size, 0.0);
  std::vector<cplx> col(size);
  double total = 0.0;
  for (std::size_t m = 0; m < size; ++m) {
    const double w = std::norm(sector_amplitudes[m]);
    total += w;
    if (w == 0.0) continue;
    std::fill(col.begin(), col.end(), cplx{0.0, 0.0});
    col[m] = 1.0;
    // exp(-i (pi/2) J) = exp(-i 2 pi tau J) with tau = 1/4.
    prop.propagate(jy, col, 0.25);
    for (std::size_t mp = 0; mp < size; ++mp) p[mp] += w * std::norm(col[mp]);
  }
  if (total == 0.0) throw std::invalid_argument("sector state has zero norm");
  for (double& x : p) x /= total;
  return p;
}

std::vector<RotatedSector> rotate_pi2_distribution(const SpinorState& state, double min_weight) {
  state.require_normalized();
  std::vector<RotatedSector> out;
  const auto& a = state.amplitudes();
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double w = std::norm(a[k]);
    if (w <= min_weight || w == 0.0) continue;
    out.push_back({static_cast<int>(k), w, pi2_distribution(static_cast<int>(k))});
  }
  return out;
}

double second_moment(std::span<const double> probability) {
  const int j = static_cast<int>(probability.size() / 2);
  double s = 0.0;
  for (std::size_t i = 0; i < probability.size(); ++i) {
    const double m = static_cast<double>(static_cast<int>(i) - j);
    s += m * m * probability[i];
  }
  return s;
}

}  // namespace twinfock
