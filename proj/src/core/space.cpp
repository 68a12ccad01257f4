#include "space.hpp"

#include <cmath>

namespace nlhc {

SpaceRef make_space(Index dim, double weight) {
  require(dim >= 0, Err::Structural, "space dimension must be nonnegative");
  require(weight > 0.0, Err::Structural, "mass weight must be positive");
  auto s = std::make_shared<HilbertSpace>();
  s->dim = dim;
  s->mass = Vec::Constant(dim, weight);
  return s;
}

SpaceRef make_space(Vec mass) {
  require((mass.array() > 0.0).all(), Err::Structural, "mass weights must be positive");
  auto s = std::make_shared<HilbertSpace>();
  s->dim = mass.size();
  s->mass = std::move(mass);
  return s;
}

double inner(const HilbertSpace& s, const Vec& x, const Vec& y) {
  require(x.size() == s.dim && y.size() == s.dim, Err::Structural, "inner: vector size mismatch");
  return x.cwiseProduct(s.mass).dot(y);
}

double norm(const HilbertSpace& s, const Vec& x) { return std::sqrt(std::max(0.0, inner(s, x, x))); }

bool same_space(const SpaceRef& a, const SpaceRef& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return a->dim == b->dim && a->mass == b->mass;
}

}  // namespace nlhc
