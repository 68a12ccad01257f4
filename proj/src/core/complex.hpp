#pragma once

#include "linmap.hpp"
#include "voxel.hpp"

#include <Eigen/SparseCholesky>

#include <array>
#include <mutex>

namespace nlhc {

// Discrete de Rham complex on a voxel domain with the electric boundary
// condition encoded by dof removal:
//   X0 --g--> H --c--> X1 --d--> X2
// Scalars sit on interior nodes, fields on edges, curls on faces, divergences
// on cells. g, c, d are signed incidence matrices scaled by 1/h; gInt, cInt,
// dInt keep the raw +-1 entries so that c*g = 0 and d*c = 0 hold exactly.
// All masses are the uniform voxel volume h^3.
class GridComplex {
 public:
  VoxelDomain domain;

  SpaceRef x0, h, x1, x2;
  SpMat g, c, d;
  SpMat gInt, cInt, dInt;

  // dof -> lattice location; dofs are ordered lexicographically by
  // (direction, z, y, x), nodes/cells by (z, y, x).
  std::vector<std::array<int, 3>> nodeAt, cellAt;
  std::vector<std::array<int, 4>> edgeAt, faceAt;  // {dir, i, j, k}

  Index nodeDofAt(int i, int j, int k) const;
  Index edgeDofAt(int dir, int i, int j, int k) const;
  Index faceDofAt(int dir, int i, int j, int k) const;
  Index cellDofAt(int i, int j, int k) const;

  // Cached SPD factorizations (computed on first use, then shared).
  // nodeFactor: g^T g; faceFactor: c c^T + d^T d.
  const Eigen::SimplicialLDLT<SpMat>& nodeFactor() const;
  const Eigen::SimplicialLDLT<SpMat>& faceFactor() const;

  // Mass-orthonormal basis of H_D = ker(div) /\ ker(c); lazy.
  const Mat& harmonic() const;
  Index harmonicDim() const { return harmonic().cols(); }

  // Orthogonal projections onto ran(g), ran(c^T) and H_D.
  Vec projectGradRange(const Vec& v) const;
  Vec projectCurlRange(const Vec& v) const;
  Vec projectHarmonic(const Vec& v) const;

  LinearMap gradMap() const { return make_map(x0, h, g); }
  LinearMap curlCircMap() const { return make_map(h, x1, c); }
  LinearMap divMap() const;   // adjoint of grad
  LinearMap curlMap() const;  // adjoint of curlCirc

 private:
  struct CacheBox {
    std::mutex mu;
    std::shared_ptr<Eigen::SimplicialLDLT<SpMat>> nodeF, faceF;
    std::shared_ptr<Mat> harm;
  };
  std::shared_ptr<CacheBox> cache_ = std::make_shared<CacheBox>();

  std::vector<Index> nodeDof_, edgeDof_, faceDof_, cellDof_;
  friend GridComplex build_complex(const VoxelDomain&);
};

using ComplexRef = std::shared_ptr<const GridComplex>;

// Throws DegenerateDomainError when the domain has no interior node.
GridComplex build_complex(const VoxelDomain& domain);
ComplexRef build_complex_ref(const VoxelDomain& domain);

// sqrt(<f, (div grad)^{-1} f>): the dual norm induced by the Dirichlet
// Laplacian on X0.
double hminus_norm(const GridComplex& cx, const Vec& f);

}  // namespace nlhc
