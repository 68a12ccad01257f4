#include "schur_grid.hpp"

namespace nlhc {

GridSplit::GridSplit(ComplexRef cx, Kind kind) : cx_(std::move(cx)), kind_(kind) {
  const GridComplex& g = *cx_;
  if (kind_ == Kind::GradKerDiv) {
    p_ = g.g;
  } else {
    // ran(curl)^perp = ran(g) + H_D
    const Mat& hb = g.harmonic();
    std::vector<Triplet> trip;
    trip.reserve(g.g.nonZeros() + hb.size());
    for (Index k = 0; k < g.g.outerSize(); ++k)
      for (SpMat::InnerIterator it(g.g, k); it; ++it)
        trip.emplace_back(it.row(), it.col(), it.value());
    for (Index q = 0; q < hb.cols(); ++q)
      for (Index i = 0; i < hb.rows(); ++i)
        if (hb(i, q) != 0.0) trip.emplace_back(i, g.x0->dim + q, hb(i, q));
    p_.resize(g.h->dim, g.x0->dim + hb.cols());
    p_.setFromTriplets(trip.begin(), trip.end());
  }
  SpMat lp = SpMat(p_.transpose()) * p_;
  lp_ = lp.rows() > 1200 ? OpFactor::fromSpd(lp) : OpFactor::fromMatrix(lp);
  require(lp_.ok(), Err::Internal, "GridSplit: potential Gram factorization failed");
}

Vec GridSplit::projectH0(const Vec& v) const { return p_ * lp_.solve(Vec(p_.transpose() * v)); }

GridSchurMaps::GridSchurMaps(const GridSplit& split, const Coefficient& eps)
    : split_(&split), eps_(&eps) {
  require(eps.cx.get() == split.complexRef().get(), Err::Structural,
          "GridSchurMaps: coefficient lives on a different complex");
  const SpMat& p = split.potential();
  SpMat np = SpMat(p.transpose() * eps.op) * p;
  np_ = (eps.symmetric && eps.alphaBound > 0 && np.rows() > 1200) ? OpFactor::fromSpd(np)
                                                                  : OpFactor::fromMatrix(np);
  require(np_.ok(), Err::Membership,
          "GridSchurMaps: compressed coefficient is singular (not in M(H0,H1))");
}

Vec GridSchurMaps::mapInv00(const Vec& v) const {
  const SpMat& p = split_->potential();
  return p * np_.solve(Vec(p.transpose() * v));
}

Vec GridSchurMaps::oblique(const Vec& v) const { return mapInv00(eps_->op * v); }

Vec GridSchurMaps::mapM01(const Vec& v) const { return oblique(v) - split_->projectH0(v); }

Vec GridSchurMaps::mapM10(const Vec& v) const {
  Vec w = eps_->op * mapInv00(v);
  return w - split_->projectH0(w);
}

Vec GridSchurMaps::mapSchur(const Vec& v) const {
  return eps_->op * (v - oblique(v));
}

double grid_schur_distance(const GridSplit& split, const Coefficient& a, const Coefficient& b,
                           const TestFamily& t) {
  require(same_space(t.space, split.complexRef()->h), Err::Structural,
          "grid_schur_distance: test family on the wrong space");
  GridSchurMaps ma(split, a), mb(split, b);
  const Index m = t.vectors.cols();
  const Vec& mass = t.space->mass;
  Mat weighted = mass.asDiagonal() * t.vectors;  // for pairings <t_j, . >
  double sum = 0.0;
  for (Index k = 0; k < m; ++k) {
    Vec tk = t.vectors.col(k);
    std::array<Vec, 4> diff = {Vec(ma.mapInv00(tk) - mb.mapInv00(tk)),
                               Vec(ma.mapM01(tk) - mb.mapM01(tk)),
                               Vec(ma.mapM10(tk) - mb.mapM10(tk)),
                               Vec(ma.mapSchur(tk) - mb.mapSchur(tk))};
    for (Index j = 0; j < m; ++j) {
      double pair = 0.0;
      for (const Vec& dv : diff) pair += std::abs(weighted.col(j).dot(dv));
      sum += t.weights(j) * t.weights(k) * pair;
    }
  }
  return sum;
}

}  // namespace nlhc
