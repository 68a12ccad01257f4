#include "factor.hpp"

#include <cmath>
#include <random>

namespace nlhc {

namespace {

Vec random_unit(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Vec v(n);
  for (Index i = 0; i < n; ++i) v(i) = gauss(rng);
  double nv = v.norm();
  return nv > 0 ? Vec(v / nv) : v;
}

}  // namespace

double power_norm(Index n, const ApplyFn& apply, const ApplyFn& applyT, int iters,
                  std::uint64_t seed) {
  if (n == 0) return 0.0;
  Vec v = random_unit(n, seed);
  double lambda = 0.0;
  for (int it = 0; it < iters; ++it) {
    Vec w = applyT(apply(v));
    double nw = w.norm();
    if (nw == 0.0) return 0.0;
    w /= nw;
    double next = nw;  // Rayleigh quotient of B^T B at unit v
    if (it > 16 && std::abs(next - lambda) <= 1e-10 * next) {
      lambda = next;
      break;
    }
    lambda = next;
    v = std::move(w);
  }
  return std::sqrt(lambda);
}

double sym_max_eig(Index n, const ApplyFn& apply, int iters, std::uint64_t seed) {
  if (n == 0) return 0.0;
  Vec v = random_unit(n, seed);
  double lambda = 0.0;
  for (int it = 0; it < iters; ++it) {
    Vec w = apply(v);
    double r = v.dot(w);
    double nw = w.norm();
    if (nw == 0.0) return 0.0;
    w /= nw;
    if (it > 16 && std::abs(r - lambda) <= 1e-11 * std::max(1.0, std::abs(r))) {
      lambda = r;
      break;
    }
    lambda = r;
    v = std::move(w);
  }
  return lambda;
}

double sym_min_eig(Index n, const ApplyFn& apply, int iters, std::uint64_t seed) {
  if (n == 0) return 0.0;
  // power iteration on s*I - S picks out the smallest eigenvalue of S
  double absMax = std::abs(sym_max_eig(n, apply, iters / 2, seed ^ 0xabcdef));
  double shift = 1.01 * absMax + 1e-30;
  auto shifted = [&](const Vec& v) { return Vec(shift * v - apply(v)); };
  double mu = sym_max_eig(n, shifted, iters, seed);
  return shift - mu;
}

}  // namespace nlhc
