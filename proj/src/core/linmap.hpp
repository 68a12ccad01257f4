#pragma once

#include "space.hpp"

#include <vector>

namespace nlhc {

// Bounded operator between two weighted spaces, stored as a coordinate matrix.
struct LinearMap {
  SpaceRef domain;
  SpaceRef codomain;
  SpMat matrix;  // shape (codomain.dim, domain.dim)

  Vec apply(const Vec& x) const;
  Mat dense() const { return Mat(matrix); }
};

LinearMap make_map(SpaceRef domain, SpaceRef codomain, SpMat matrix);
LinearMap make_map(SpaceRef domain, SpaceRef codomain, const Mat& matrix);
LinearMap identity_map(SpaceRef space);

// A* = M_dom^{-1} A^T M_cod, so <Ax,y>_cod = <x,A*y>_dom.
LinearMap adjoint(const LinearMap& a);

// (a o b)(x) = a(b(x)).
LinearMap compose(const LinearMap& a, const LinearMap& b);

// Block-diagonal sum on the concatenated spaces.
LinearMap direct_sum(const std::vector<LinearMap>& maps);

double operator_norm_dense(const LinearMap& a);

// inf ||A phi|| / ||phi|| over phi orthogonal to ker(A); +inf for the zero map.
double min_modulus(const LinearMap& a, double tol = kRankTol);

Index rank(const LinearMap& a, double tol = kRankTol);

}  // namespace nlhc
