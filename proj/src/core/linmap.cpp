#include "linmap.hpp"

#include <Eigen/SVD>
#include <Eigen/SparseQR>

#include <limits>

namespace nlhc {

Vec LinearMap::apply(const Vec& x) const {
  require(x.size() == domain->dim, Err::Structural, "apply: vector size mismatch");
  return matrix * x;
}

LinearMap make_map(SpaceRef domain, SpaceRef codomain, SpMat matrix) {
  require(domain && codomain, Err::Structural, "make_map: null space");
  require(matrix.rows() == codomain->dim && matrix.cols() == domain->dim, Err::Structural,
          "make_map: matrix shape does not match spaces");
  return LinearMap{std::move(domain), std::move(codomain), std::move(matrix)};
}

LinearMap make_map(SpaceRef domain, SpaceRef codomain, const Mat& matrix) {
  return make_map(std::move(domain), std::move(codomain), SpMat(matrix.sparseView()));
}

LinearMap identity_map(SpaceRef space) {
  SpMat id(space->dim, space->dim);
  id.setIdentity();
  return make_map(space, space, std::move(id));
}

LinearMap adjoint(const LinearMap& a) {
  SpMat at = a.matrix.transpose();
  // scale rows by 1/mass_dom and columns by mass_cod
  for (Index k = 0; k < at.outerSize(); ++k)
    for (SpMat::InnerIterator it(at, k); it; ++it)
      it.valueRef() *= a.codomain->mass(it.col()) / a.domain->mass(it.row());
  return make_map(a.codomain, a.domain, std::move(at));
}

LinearMap compose(const LinearMap& a, const LinearMap& b) {
  require(same_space(a.domain, b.codomain), Err::Structural, "compose: space mismatch");
  return make_map(b.domain, a.codomain, SpMat(a.matrix * b.matrix));
}

LinearMap direct_sum(const std::vector<LinearMap>& maps) {
  require(!maps.empty(), Err::Structural, "direct_sum: empty list");
  Index ndom = 0, ncod = 0, nnz = 0;
  for (const auto& m : maps) {
    ndom += m.domain->dim;
    ncod += m.codomain->dim;
    nnz += m.matrix.nonZeros();
  }
  Vec massDom(ndom), massCod(ncod);
  std::vector<Triplet> trip;
  trip.reserve(static_cast<size_t>(nnz));
  Index r0 = 0, c0 = 0;
  for (const auto& m : maps) {
    massDom.segment(c0, m.domain->dim) = m.domain->mass;
    massCod.segment(r0, m.codomain->dim) = m.codomain->mass;
    for (Index k = 0; k < m.matrix.outerSize(); ++k)
      for (SpMat::InnerIterator it(m.matrix, k); it; ++it)
        trip.emplace_back(r0 + it.row(), c0 + it.col(), it.value());
    r0 += m.codomain->dim;
    c0 += m.domain->dim;
  }
  SpMat big(ncod, ndom);
  big.setFromTriplets(trip.begin(), trip.end());
  return make_map(make_space(std::move(massDom)), make_space(std::move(massCod)), std::move(big));
}

namespace {

// Matrix of the map between the flattened (unit-mass) coordinates:
// Atil = Mc^{1/2} A Md^{-1/2}; its singular values are the weighted ones.
Mat flattened_dense(const LinearMap& a) {
  Mat m = a.dense();
  Vec sc = a.codomain->mass.array().sqrt();
  Vec sd = a.domain->mass.array().sqrt().inverse();
  return sc.asDiagonal() * m * sd.asDiagonal();
}

}  // namespace

double operator_norm_dense(const LinearMap& a) {
  if (a.matrix.nonZeros() == 0) return 0.0;
  Eigen::BDCSVD<Mat> svd(flattened_dense(a));
  return svd.singularValues()(0);
}

double min_modulus(const LinearMap& a, double tol) {
  if (a.matrix.nonZeros() == 0) return std::numeric_limits<double>::infinity();
  require(std::max(a.matrix.rows(), a.matrix.cols()) <= kDenseCap, Err::Structural,
          "min_modulus: dimension above dense cap");
  Eigen::BDCSVD<Mat> svd(flattened_dense(a));
  const Vec& s = svd.singularValues();
  double cut = tol * s(0);
  double gamma = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > cut) gamma = s(i);
  return gamma;
}

Index rank(const LinearMap& a, double tol) {
  if (a.matrix.nonZeros() == 0) return 0;
  if (std::max(a.matrix.rows(), a.matrix.cols()) <= kDenseCap) {
    Eigen::BDCSVD<Mat> svd(flattened_dense(a));
    const Vec& s = svd.singularValues();
    double cut = tol * s(0);
    Index r = 0;
    for (Index i = 0; i < s.size(); ++i)
      if (s(i) > cut) ++r;
    return r;
  }
  // Sparse rank-revealing QR with the same relative threshold. The diagonal
  // mass scaling does not change the rank.
  SpMat m = a.matrix;
  m.makeCompressed();
  Eigen::SparseQR<SpMat, Eigen::COLAMDOrdering<int>> qr;
  double scale = 0.0;
  for (Index k = 0; k < m.outerSize(); ++k)
    for (SpMat::InnerIterator it(m, k); it; ++it) scale = std::max(scale, std::abs(it.value()));
  qr.setPivotThreshold(tol * scale);
  qr.compute(m);
  require(qr.info() == Eigen::Success, Err::Solve, "rank: sparse QR failed");
  return qr.rank();
}

}  // namespace nlhc
