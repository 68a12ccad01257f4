#include "subspace.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace nlhc {

Subspace span_subspace(SpaceRef ambient, const Mat& raw, double tol) {
  require(raw.rows() == ambient->dim, Err::Structural, "span_subspace: row count mismatch");
  const Vec& m = ambient->mass;
  double largest = 0.0;
  for (Index c = 0; c < raw.cols(); ++c)
    largest = std::max(largest, std::sqrt(raw.col(c).cwiseProduct(m).dot(raw.col(c))));
  Mat basis(ambient->dim, raw.cols());
  Mat weighted(ambient->dim, raw.cols());  // mass-scaled kept columns
  Index kept = 0;
  for (Index c = 0; c < raw.cols(); ++c) {
    Vec v = raw.col(c);
    for (int pass = 0; pass < 2; ++pass) {  // reorthogonalize once
      if (kept > 0)
        v.noalias() -= basis.leftCols(kept) * (weighted.leftCols(kept).transpose() * v);
    }
    double nv = std::sqrt(std::max(0.0, v.cwiseProduct(m).dot(v)));
    if (nv > tol * std::max(largest, 1e-300)) {
      basis.col(kept) = v / nv;
      weighted.col(kept) = basis.col(kept).cwiseProduct(m);
      ++kept;
    }
  }
  basis.conservativeResize(Eigen::NoChange, kept);
  return Subspace{std::move(ambient), std::move(basis)};
}

Subspace full_subspace(SpaceRef ambient) {
  Mat basis = Mat::Zero(ambient->dim, ambient->dim);
  for (Index i = 0; i < ambient->dim; ++i) basis(i, i) = 1.0 / std::sqrt(ambient->mass(i));
  return Subspace{std::move(ambient), std::move(basis)};
}

Subspace zero_subspace(SpaceRef ambient) {
  return Subspace{std::move(ambient), Mat(ambient ? ambient->dim : 0, 0)};
}

Subspace complement(const Subspace& s) {
  // full QR of the mass-flattened basis; the trailing Q columns span the
  // orthogonal complement
  const Index n = s.ambient->dim, k = s.dim();
  Vec sqrtM = s.ambient->mass.array().sqrt();
  Mat flat = sqrtM.asDiagonal() * s.basis;
  Eigen::HouseholderQR<Mat> qr(flat);
  Mat q = qr.householderQ() * Mat::Identity(n, n);
  Mat comp = sqrtM.cwiseInverse().asDiagonal() * q.rightCols(n - k);
  return Subspace{s.ambient, std::move(comp)};
}

Vec project(const Subspace& s, const Vec& v) {
  require(v.size() == s.ambient->dim, Err::Structural, "project: vector size mismatch");
  return s.basis * coords(s, v);
}

Vec coords(const Subspace& s, const Vec& v) {
  require(v.size() == s.ambient->dim, Err::Structural, "coords: vector size mismatch");
  return s.basis.transpose() * v.cwiseProduct(s.ambient->mass);
}

bool is_orthonormal(const Subspace& s, double tol) {
  Mat gram = s.basis.transpose() * s.ambient->mass.asDiagonal() * s.basis;
  gram -= Mat::Identity(s.dim(), s.dim());
  return gram.cwiseAbs().maxCoeff() <= tol || s.dim() == 0;
}

FundamentalSubspaces fundamental_subspaces(const LinearMap& a, double tol) {
  require(tol > 0, Err::Structural, "fundamental_subspaces: tol must be positive");
  const Index nd = a.domain->dim, nc = a.codomain->dim;
  require(std::max(nd, nc) <= kDenseCap, Err::Structural,
          "fundamental_subspaces: dimension above dense cap");
  Vec sc = a.codomain->mass.array().sqrt();
  Vec sdInv = a.domain->mass.array().sqrt().inverse();
  Mat flat = sc.asDiagonal() * a.dense() * sdInv.asDiagonal();
  Eigen::BDCSVD<Mat> svd(flat, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Vec& s = svd.singularValues();
  double cut = s.size() ? tol * s(0) : 0.0;
  Index r = 0;
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > cut) ++r;
  // map flattened singular vectors back to mass-orthonormal bases
  Mat kernel = sdInv.asDiagonal() * svd.matrixV().rightCols(nd - r);
  Mat range = a.codomain->mass.array().sqrt().inverse().matrix().asDiagonal() * svd.matrixU().leftCols(r);
  return FundamentalSubspaces{Subspace{a.domain, std::move(kernel)},
                              Subspace{a.codomain, std::move(range)}};
}

LinearMap compress(const LinearMap& a, const Subspace& s0, const Subspace& s1) {
  require(same_space(s0.ambient, a.domain), Err::Structural, "compress: domain mismatch");
  require(same_space(s1.ambient, a.codomain), Err::Structural, "compress: codomain mismatch");
  Mat small = s1.basis.transpose() * a.codomain->mass.asDiagonal() * (a.matrix * s0.basis);
  return make_map(make_space(s0.dim()), make_space(s1.dim()), small);
}

Mat compress_dense(const Mat& ambientMatrix, const Subspace& s0, const Subspace& s1) {
  require(ambientMatrix.cols() == s0.ambient->dim && ambientMatrix.rows() == s1.ambient->dim,
          Err::Structural, "compress_dense: shape mismatch");
  return s1.basis.transpose() * s1.ambient->mass.asDiagonal() * ambientMatrix * s0.basis;
}

}  // namespace nlhc
