#pragma once

#include "types.hpp"

namespace nlhc {

// Finite-dimensional real Hilbert space with a positive diagonal mass.
// <x,y> = x^T diag(mass) y.
struct HilbertSpace {
  Index dim = 0;
  Vec mass;  // size dim, strictly positive
};

using SpaceRef = std::shared_ptr<const HilbertSpace>;

SpaceRef make_space(Index dim, double weight = 1.0);
SpaceRef make_space(Vec mass);

double inner(const HilbertSpace& s, const Vec& x, const Vec& y);
double norm(const HilbertSpace& s, const Vec& x);

inline double inner(const SpaceRef& s, const Vec& x, const Vec& y) { return inner(*s, x, y); }
inline double norm(const SpaceRef& s, const Vec& x) { return norm(*s, x); }

bool same_space(const SpaceRef& a, const SpaceRef& b);

}  // namespace nlhc
