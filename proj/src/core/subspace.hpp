#pragma once

#include "linmap.hpp"

namespace nlhc {

// Closed subspace given by a mass-orthonormal basis: basis^T M basis = I.
struct Subspace {
  SpaceRef ambient;
  Mat basis;

  Index dim() const { return basis.cols(); }
};

// Orthonormalizes the columns of raw (modified Gram-Schmidt in the weighted
// inner product); columns with residual norm below tol * largest are dropped.
Subspace span_subspace(SpaceRef ambient, const Mat& raw, double tol = kRankTol);

Subspace full_subspace(SpaceRef ambient);
Subspace zero_subspace(SpaceRef ambient);

// Orthonormal complement of s in its ambient space.
Subspace complement(const Subspace& s);

Vec project(const Subspace& s, const Vec& v);

// iota_S^* v: coordinates of the orthogonal projection.
Vec coords(const Subspace& s, const Vec& v);

bool is_orthonormal(const Subspace& s, double tol = 1e-12);

struct FundamentalSubspaces {
  Subspace kernel;  // of A, in the domain
  Subspace range;   // of A, in the codomain
};

FundamentalSubspaces fundamental_subspaces(const LinearMap& a, double tol = kRankTol);

// iota_{S1}^* A iota_{S0} expressed in the subspace bases.
LinearMap compress(const LinearMap& a, const Subspace& s0, const Subspace& s1);
Mat compress_dense(const Mat& ambientMatrix, const Subspace& s0, const Subspace& s1);

}  // namespace nlhc
