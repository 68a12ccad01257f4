#include "complex.hpp"

#include "subspace.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <random>

namespace nlhc {

namespace {

inline size_t flat(int i, int j, int k, int ni, int nj) {
  return static_cast<size_t>(i) + static_cast<size_t>(ni) * (static_cast<size_t>(j) +
                                                             static_cast<size_t>(nj) * k);
}

bool edgeKept(const VoxelDomain& d, int dir, int i, int j, int k) {
  switch (dir) {
    case 0:
      return d.occupied(i, j - 1, k - 1) && d.occupied(i, j, k - 1) && d.occupied(i, j - 1, k) &&
             d.occupied(i, j, k);
    case 1:
      return d.occupied(i - 1, j, k - 1) && d.occupied(i, j, k - 1) && d.occupied(i - 1, j, k) &&
             d.occupied(i, j, k);
    default:
      return d.occupied(i - 1, j - 1, k) && d.occupied(i, j - 1, k) && d.occupied(i - 1, j, k) &&
             d.occupied(i, j, k);
  }
}

bool nodeKept(const VoxelDomain& d, int i, int j, int k) {
  for (int dk = -1; dk <= 0; ++dk)
    for (int dj = -1; dj <= 0; ++dj)
      for (int di = -1; di <= 0; ++di)
        if (!d.occupied(i + di, j + dj, k + dk)) return false;
  return true;
}

bool faceKept(const VoxelDomain& d, int dir, int i, int j, int k) {
  switch (dir) {
    case 0:
      return d.occupied(i - 1, j, k) && d.occupied(i, j, k);
    case 1:
      return d.occupied(i, j - 1, k) && d.occupied(i, j, k);
    default:
      return d.occupied(i, j, k - 1) && d.occupied(i, j, k);
  }
}

}  // namespace

GridComplex build_complex(const VoxelDomain& domain) {
  require(!domain.mask.empty(), Err::Structural, "build_complex: empty domain");
  GridComplex cx;
  cx.domain = domain;
  const int nx = domain.nx, ny = domain.ny, nz = domain.nz;
  const int mx = nx + 1, my = ny + 1, mz = nz + 1;

  cx.nodeDof_.assign(static_cast<size_t>(mx) * my * mz, -1);
  for (int k = 0; k <= nz; ++k)
    for (int j = 0; j <= ny; ++j)
      for (int i = 0; i <= nx; ++i)
        if (nodeKept(domain, i, j, k)) {
          cx.nodeDof_[flat(i, j, k, mx, my)] = static_cast<Index>(cx.nodeAt.size());
          cx.nodeAt.push_back({i, j, k});
        }
  require(!cx.nodeAt.empty(), Err::DegenerateDomain,
          "build_complex: domain has no interior node");

  cx.edgeDof_.assign(3 * static_cast<size_t>(mx) * my * mz, -1);
  for (int dir = 0; dir < 3; ++dir)
    for (int k = 0; k <= nz; ++k)
      for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i) {
          if ((dir == 0 && i >= nx) || (dir == 1 && j >= ny) || (dir == 2 && k >= nz)) continue;
          if (!edgeKept(domain, dir, i, j, k)) continue;
          cx.edgeDof_[dir * static_cast<size_t>(mx) * my * mz + flat(i, j, k, mx, my)] =
              static_cast<Index>(cx.edgeAt.size());
          cx.edgeAt.push_back({dir, i, j, k});
        }

  cx.faceDof_.assign(3 * static_cast<size_t>(mx) * my * mz, -1);
  for (int dir = 0; dir < 3; ++dir)
    for (int k = 0; k <= nz; ++k)
      for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i) {
          if (dir == 0 && (j >= ny || k >= nz)) continue;
          if (dir == 1 && (i >= nx || k >= nz)) continue;
          if (dir == 2 && (i >= nx || j >= ny)) continue;
          if (!faceKept(domain, dir, i, j, k)) continue;
          cx.faceDof_[dir * static_cast<size_t>(mx) * my * mz + flat(i, j, k, mx, my)] =
              static_cast<Index>(cx.faceAt.size());
          cx.faceAt.push_back({dir, i, j, k});
        }

  cx.cellDof_.assign(static_cast<size_t>(nx) * ny * nz, -1);
  for (int k = 0; k < nz; ++k)
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i)
        if (domain.occupied(i, j, k)) {
          cx.cellDof_[flat(i, j, k, nx, ny)] = static_cast<Index>(cx.cellAt.size());
          cx.cellAt.push_back({i, j, k});
        }

  const double vol = domain.h * domain.h * domain.h;
  cx.x0 = make_space(static_cast<Index>(cx.nodeAt.size()), vol);
  cx.h = make_space(static_cast<Index>(cx.edgeAt.size()), vol);
  cx.x1 = make_space(static_cast<Index>(cx.faceAt.size()), vol);
  cx.x2 = make_space(static_cast<Index>(cx.cellAt.size()), vol);

  {
    std::vector<Triplet> trip;
    trip.reserve(cx.edgeAt.size() * 2);
    for (size_t e = 0; e < cx.edgeAt.size(); ++e) {
      auto [dir, i, j, k] = cx.edgeAt[e];
      Index tail = cx.nodeDofAt(i, j, k);
      Index head = cx.nodeDofAt(i + (dir == 0), j + (dir == 1), k + (dir == 2));
      if (tail >= 0) trip.emplace_back(static_cast<Index>(e), tail, -1.0);
      if (head >= 0) trip.emplace_back(static_cast<Index>(e), head, 1.0);
    }
    cx.gInt.resize(static_cast<Index>(cx.edgeAt.size()), cx.x0->dim);
    cx.gInt.setFromTriplets(trip.begin(), trip.end());
  }

  // circulation around the face normal: with (dir,u,v) cyclic the boundary is
  // +u at p, +v at p+e_u, -u at p+e_v, -v at p
  {
    std::vector<Triplet> trip;
    trip.reserve(cx.faceAt.size() * 4);
    for (size_t f = 0; f < cx.faceAt.size(); ++f) {
      auto [dir, i, j, k] = cx.faceAt[f];
      int u = (dir + 1) % 3, v = (dir + 2) % 3;
      int ux = (u == 0), uy = (u == 1), uz = (u == 2);
      int vx = (v == 0), vy = (v == 1), vz = (v == 2);
      Index e1 = cx.edgeDofAt(u, i, j, k);
      Index e2 = cx.edgeDofAt(v, i + ux, j + uy, k + uz);
      Index e3 = cx.edgeDofAt(u, i + vx, j + vy, k + vz);
      Index e4 = cx.edgeDofAt(v, i, j, k);
      if (e1 >= 0) trip.emplace_back(static_cast<Index>(f), e1, 1.0);
      if (e2 >= 0) trip.emplace_back(static_cast<Index>(f), e2, 1.0);
      if (e3 >= 0) trip.emplace_back(static_cast<Index>(f), e3, -1.0);
      if (e4 >= 0) trip.emplace_back(static_cast<Index>(f), e4, -1.0);
    }
    cx.cInt.resize(static_cast<Index>(cx.faceAt.size()), cx.h->dim);
    cx.cInt.setFromTriplets(trip.begin(), trip.end());
  }

  {
    std::vector<Triplet> trip;
    trip.reserve(cx.cellAt.size() * 6);
    for (size_t cidx = 0; cidx < cx.cellAt.size(); ++cidx) {
      auto [i, j, k] = cx.cellAt[cidx];
      for (int dir = 0; dir < 3; ++dir) {
        Index lo = cx.faceDofAt(dir, i, j, k);
        Index hi = cx.faceDofAt(dir, i + (dir == 0), j + (dir == 1), k + (dir == 2));
        if (lo >= 0) trip.emplace_back(static_cast<Index>(cidx), lo, -1.0);
        if (hi >= 0) trip.emplace_back(static_cast<Index>(cidx), hi, 1.0);
      }
    }
    cx.dInt.resize(static_cast<Index>(cx.cellAt.size()), cx.x1->dim);
    cx.dInt.setFromTriplets(trip.begin(), trip.end());
  }

  const double s = 1.0 / domain.h;
  cx.g = cx.gInt * s;
  cx.c = cx.cInt * s;
  cx.d = cx.dInt * s;
  return cx;
}

ComplexRef build_complex_ref(const VoxelDomain& domain) {
  return std::make_shared<const GridComplex>(build_complex(domain));
}

Index GridComplex::nodeDofAt(int i, int j, int k) const {
  const int mx = domain.nx + 1, my = domain.ny + 1, mz = domain.nz + 1;
  if (i < 0 || j < 0 || k < 0 || i >= mx || j >= my || k >= mz) return -1;
  return nodeDof_[flat(i, j, k, mx, my)];
}

Index GridComplex::edgeDofAt(int dir, int i, int j, int k) const {
  const int mx = domain.nx + 1, my = domain.ny + 1, mz = domain.nz + 1;
  if (i < 0 || j < 0 || k < 0 || i >= mx || j >= my || k >= mz) return -1;
  return edgeDof_[dir * static_cast<size_t>(mx) * my * mz + flat(i, j, k, mx, my)];
}

Index GridComplex::faceDofAt(int dir, int i, int j, int k) const {
  const int mx = domain.nx + 1, my = domain.ny + 1, mz = domain.nz + 1;
  if (i < 0 || j < 0 || k < 0 || i >= mx || j >= my || k >= mz) return -1;
  return faceDof_[dir * static_cast<size_t>(mx) * my * mz + flat(i, j, k, mx, my)];
}

Index GridComplex::cellDofAt(int i, int j, int k) const {
  if (!domain.inGrid(i, j, k)) return -1;
  return cellDof_[flat(i, j, k, domain.nx, domain.ny)];
}

const Eigen::SimplicialLDLT<SpMat>& GridComplex::nodeFactor() const {
  std::lock_guard<std::mutex> lock(cache_->mu);
  if (!cache_->nodeF) {
    auto f = std::make_shared<Eigen::SimplicialLDLT<SpMat>>();
    SpMat lap = SpMat(g.transpose()) * g;
    f->compute(lap);
    require(f->info() == Eigen::Success, Err::Solve, "node Laplacian factorization failed");
    cache_->nodeF = std::move(f);
  }
  return *cache_->nodeF;
}

const Eigen::SimplicialLDLT<SpMat>& GridComplex::faceFactor() const {
  std::lock_guard<std::mutex> lock(cache_->mu);
  if (!cache_->faceF) {
    auto f = std::make_shared<Eigen::SimplicialLDLT<SpMat>>();
    SpMat a0 = c * SpMat(c.transpose()) + SpMat(d.transpose()) * d;
    f->compute(a0);
    require(f->info() == Eigen::Success, Err::Solve,
            "face factorization failed (domain with tunnels?)");
    cache_->faceF = std::move(f);
  }
  return *cache_->faceF;
}

Vec GridComplex::projectGradRange(const Vec& v) const {
  return g * nodeFactor().solve(g.transpose() * v);
}

Vec GridComplex::projectCurlRange(const Vec& v) const {
  return c.transpose() * faceFactor().solve(c * v);
}

Vec GridComplex::projectHarmonic(const Vec& v) const {
  const Mat& hb = harmonic();
  if (hb.cols() == 0) return Vec::Zero(h->dim);
  return hb * (hb.transpose() * v.cwiseProduct(h->mass));
}

const Mat& GridComplex::harmonic() const {
  {
    std::lock_guard<std::mutex> lock(cache_->mu);
    if (cache_->harm) return *cache_->harm;
  }
  Mat basis;
  const Index n = h->dim;
  if (n <= 1500) {
    // kernel of the stacked map [div; c] via dense SVD; no topology assumptions
    LinearMap divm = divMap();
    Mat stacked(x0->dim + x1->dim, n);
    stacked.topRows(x0->dim) = divm.dense();
    stacked.bottomRows(x1->dim) = Mat(c);
    Vec massCat(x0->dim + x1->dim);
    massCat << x0->mass, x1->mass;
    LinearMap sm = make_map(h, make_space(massCat), stacked);
    basis = fundamental_subspaces(sm).kernel.basis;
  } else {
    // orthogonal-projection route: pi_D = I - pi_ran(g) - pi_ran(c^T);
    // relies on ker(c^T) /\ ker(d) = 0 (tunnel-free), which the residual
    // check below verifies a posteriori
    std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Index guess = 8;
    for (;;) {
      Mat kept(n, guess);
      Index nKept = 0;
      for (Index q = 0; q < guess; ++q) {
        Vec p(n);
        for (Index i = 0; i < n; ++i) p(i) = gauss(rng);
        p /= norm(h, p);
        for (int pass = 0; pass < 2; ++pass) {
          p -= projectGradRange(p);
          p -= projectCurlRange(p);
        }
        // a unit probe keeps an O(sqrt(dim H_D / n)) harmonic component;
        // pure-solver leftovers sit around 1e-13
        if (norm(h, p) > 1e-6) kept.col(nKept++) = p;
      }
      kept.conservativeResize(Eigen::NoChange, nKept);
      Subspace s = span_subspace(h, kept, 1e-6);
      if (s.dim() < guess || guess >= 64) {
        basis = s.basis;
        break;
      }
      guess *= 2;
    }
  }
  const double volSqrt = std::sqrt(h->mass(0));
  for (Index q = 0; q < basis.cols(); ++q) {
    Vec x = basis.col(q);
    double rDiv = (g.transpose() * x).norm() * volSqrt;
    double rCurl = (c * x).norm() * volSqrt;
    require(rDiv <= 1e-10 && rCurl <= 1e-10, Err::Internal,
            "harmonic basis residual check failed");
  }
  std::lock_guard<std::mutex> lock(cache_->mu);
  if (!cache_->harm) cache_->harm = std::make_shared<Mat>(std::move(basis));
  return *cache_->harm;
}

LinearMap GridComplex::divMap() const { return adjoint(gradMap()); }
LinearMap GridComplex::curlMap() const { return adjoint(curlCircMap()); }

double hminus_norm(const GridComplex& cx, const Vec& f) {
  require(f.size() == cx.x0->dim, Err::Structural, "hminus_norm: size mismatch");
  if (f.size() == 0) return 0.0;
  Vec y = cx.nodeFactor().solve(f);
  double q = f.cwiseProduct(cx.x0->mass).dot(y);
  return std::sqrt(std::max(0.0, q));
}

}  // namespace nlhc
