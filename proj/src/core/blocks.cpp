#include "blocks.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>

#include <cmath>
#include <random>

namespace nlhc {

BlockSplit make_split(Subspace h0, Subspace h1) {
  require(same_space(h0.ambient, h1.ambient), Err::Structural, "make_split: ambient mismatch");
  require(h0.dim() + h1.dim() == h0.ambient->dim, Err::Structural,
          "make_split: dimensions do not fill the ambient space");
  Mat cross = h0.basis.transpose() * h0.ambient->mass.asDiagonal() * h1.basis;
  require(cross.size() == 0 || cross.cwiseAbs().maxCoeff() <= 1e-10, Err::Structural,
          "make_split: subspaces are not orthogonal");
  return BlockSplit{h0.ambient, std::move(h0), std::move(h1)};
}

BlockSplit split_from_h0(Subspace h0) {
  Subspace h1 = complement(h0);
  return make_split(std::move(h0), std::move(h1));
}

BlockOperator block_operator(std::shared_ptr<const BlockSplit> split, const Mat& ambientMatrix) {
  const BlockSplit& s = *split;
  require(ambientMatrix.rows() == s.ambient->dim && ambientMatrix.cols() == s.ambient->dim,
          Err::Structural, "block_operator: ambient matrix shape mismatch");
  BlockOperator b;
  b.split = split;
  Mat w = s.ambient->mass.asDiagonal() * ambientMatrix;
  Mat w0 = w * s.h0.basis, w1 = w * s.h1.basis;
  b.a00 = s.h0.basis.transpose() * w0;
  b.a01 = s.h0.basis.transpose() * w1;
  b.a10 = s.h1.basis.transpose() * w0;
  b.a11 = s.h1.basis.transpose() * w1;
  return b;
}

BlockOperator block_operator(std::shared_ptr<const BlockSplit> split, const LinearMap& a) {
  require(same_space(a.domain, split->ambient) && same_space(a.codomain, split->ambient),
          Err::Structural, "block_operator: map not on the split's ambient space");
  return block_operator(split, a.dense());
}

BlockOperator block_operator_from_parts(std::shared_ptr<const BlockSplit> split, Mat a00, Mat a01,
                                        Mat a10, Mat a11) {
  const Index n0 = split->h0.dim(), n1 = split->h1.dim();
  require(a00.rows() == n0 && a00.cols() == n0 && a01.rows() == n0 && a01.cols() == n1 &&
              a10.rows() == n1 && a10.cols() == n0 && a11.rows() == n1 && a11.cols() == n1,
          Err::Structural, "block_operator_from_parts: block shapes mismatch");
  return BlockOperator{std::move(split), std::move(a00), std::move(a01), std::move(a10),
                       std::move(a11)};
}

Mat assemble(const BlockOperator& a) {
  const BlockSplit& s = *a.split;
  Mat p0 = s.h0.basis.transpose() * s.ambient->mass.asDiagonal();  // iota_0^*
  Mat p1 = s.h1.basis.transpose() * s.ambient->mass.asDiagonal();
  return s.h0.basis * (a.a00 * p0 + a.a01 * p1) + s.h1.basis * (a.a10 * p0 + a.a11 * p1);
}

double condition_number(const Mat& m) {
  if (m.size() == 0) return 1.0;
  Eigen::BDCSVD<Mat> svd(m);
  const Vec& s = svd.singularValues();
  double smin = s(s.size() - 1);
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

bool is_member(const BlockOperator& a, double condCap) {
  if (a.a00.size() > 0 && condition_number(a.a00) >= condCap) return false;
  Mat full(a.a00.rows() + a.a10.rows(), a.a00.cols() + a.a01.cols());
  full << a.a00, a.a01, a.a10, a.a11;
  return condition_number(full) < condCap;
}

SchurData schur_data(const BlockOperator& a, double condCap) {
  require(a.a00.size() == 0 || condition_number(a.a00) < condCap, Err::Membership,
          "schur_data: a00 is singular, a is not in M(H0,H1)");
  SchurData sd;
  Eigen::PartialPivLU<Mat> lu(a.a00);
  sd.inv00 = lu.inverse();
  sd.m01 = lu.solve(a.a01);
  sd.m10 = a.a10 * sd.inv00;
  sd.schur = a.a11 - a.a10 * sd.m01;
  return sd;
}

double schur_factorization_residual(const BlockOperator& a, const SchurData& sd) {
  const Index n0 = a.a00.rows(), n1 = a.a11.rows();
  Mat full(n0 + n1, n0 + n1), lower = Mat::Identity(n0 + n1, n0 + n1),
      upper = Mat::Identity(n0 + n1, n0 + n1);
  full << a.a00, a.a01, a.a10, a.a11;
  lower.block(n0, 0, n1, n0) = -sd.m10;
  upper.block(0, n0, n0, n1) = -sd.m01;
  Mat diag = Mat::Zero(n0 + n1, n0 + n1);
  diag.topLeftCorner(n0, n0) = a.a00;
  diag.bottomRightCorner(n1, n1) = sd.schur;
  double scale = std::max(full.norm(), 1e-300);
  return (lower * full * upper - diag).norm() / scale;
}

Mat block_inverse_matrix(const BlockOperator& a, double condCap) {
  SchurData sd = schur_data(a, condCap);
  require(sd.schur.size() == 0 || condition_number(sd.schur) < condCap, Err::Membership,
          "block_inverse: Schur complement is singular");
  const Index n0 = a.a00.rows(), n1 = a.a11.rows();
  Eigen::PartialPivLU<Mat> lus(sd.schur);
  Mat invS = lus.inverse();
  Mat inv(n0 + n1, n0 + n1);
  inv.topLeftCorner(n0, n0) = sd.inv00 + sd.m01 * invS * sd.m10;
  inv.topRightCorner(n0, n1) = -sd.m01 * invS;
  inv.bottomLeftCorner(n1, n0) = -invS * sd.m10;
  inv.bottomRightCorner(n1, n1) = invS;
  return inv;
}

LinearMap block_inverse(const BlockOperator& a, double condCap) {
  Mat inv = block_inverse_matrix(a, condCap);
  const BlockSplit& s = *a.split;
  BlockOperator bi = block_operator_from_parts(
      a.split, inv.topLeftCorner(s.h0.dim(), s.h0.dim()),
      inv.topRightCorner(s.h0.dim(), s.h1.dim()), inv.bottomLeftCorner(s.h1.dim(), s.h0.dim()),
      inv.bottomRightCorner(s.h1.dim(), s.h1.dim()));
  return make_map(s.ambient, s.ambient, assemble(bi));
}

DualityReport inversion_duality(const BlockOperator& a, double condCap) {
  SchurData sd = schur_data(a, condCap);
  Mat inv = block_inverse_matrix(a, condCap);
  const Index n0 = a.a00.rows(), n1 = a.a11.rows();
  // blocks of a^{-1} w.r.t. the swapped split (H1, H0)
  Mat i11 = inv.bottomRightCorner(n1, n1);
  Mat i10 = inv.bottomLeftCorner(n1, n0);
  Mat i01 = inv.topRightCorner(n0, n1);
  Mat i00 = inv.topLeftCorner(n0, n0);
  require(i11.size() == 0 || condition_number(i11) < condCap, Err::Membership,
          "inversion_duality: [a^-1]_11 is singular");
  Eigen::PartialPivLU<Mat> lu(i11);
  Mat i11inv = lu.inverse();
  DualityReport r;
  Mat full(n0 + n1, n0 + n1);
  full << a.a00, a.a01, a.a10, a.a11;
  r.scale = std::max(full.norm(), 1e-300);
  r.resSchur = (i11inv - sd.schur).norm() / r.scale;
  r.resM10 = (i11inv * i10 + sd.m10).norm() / r.scale;
  r.resM01 = (i01 * i11inv + sd.m01).norm() / r.scale;
  r.resInv00 = ((i00 - i01 * i11inv * i10) - sd.inv00).norm() / r.scale;
  return r;
}

double tau_bound(const BlockOperator& a, double condCap) {
  SchurData sd = schur_data(a, condCap);
  auto specNorm = [](const Mat& m) {
    if (m.size() == 0) return 0.0;
    Eigen::BDCSVD<Mat> svd(m);
    return svd.singularValues()(0);
  };
  return std::max(std::max(specNorm(sd.inv00), specNorm(sd.m01)),
                  std::max(specNorm(sd.m10), specNorm(sd.schur)));
}

TestFamily make_test_family(SpaceRef space, const Mat& rawVectors) {
  Subspace s = span_subspace(space, rawVectors, 1e-8);
  require(s.dim() > 0, Err::Structural, "make_test_family: no independent vectors");
  Vec w(s.dim());
  for (Index j = 0; j < s.dim(); ++j) w(j) = std::pow(2.0, -static_cast<double>(j + 1));
  return TestFamily{std::move(space), std::move(s.basis), std::move(w)};
}

TestFamily default_test_family(SpaceRef space, Index modes, Index randoms, std::uint64_t seed) {
  const Index n = space->dim;
  Mat raw(n, modes + randoms);
  for (Index j = 0; j < modes; ++j) {
    // low-index Fourier-like profiles over the coordinate index
    double freq = static_cast<double>(j / 2 + 1);
    for (Index i = 0; i < n; ++i) {
      double t = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
      raw(i, j) = (j % 2 == 0) ? std::cos(M_PI * freq * t) : std::sin(M_PI * freq * t);
    }
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (Index j = 0; j < randoms; ++j)
    for (Index i = 0; i < n; ++i) raw(i, modes + j) = gauss(rng);
  return make_test_family(std::move(space), raw);
}

double schur_distance(const BlockOperator& a, const BlockOperator& b, const TestFamily& t,
                      double condCap) {
  require(a.split == b.split || (same_space(a.split->ambient, b.split->ambient) &&
                                 a.split->h0.basis == b.split->h0.basis &&
                                 a.split->h1.basis == b.split->h1.basis),
          Err::Structural, "schur_distance: split mismatch");
  require(same_space(t.space, a.split->ambient), Err::Structural,
          "schur_distance: test family lives on a different space");
  SchurData sa = schur_data(a, condCap), sb = schur_data(b, condCap);
  // compress the family once per block
  const BlockSplit& s = *a.split;
  Mat t0 = s.h0.basis.transpose() * (s.ambient->mass.asDiagonal() * t.vectors);
  Mat t1 = s.h1.basis.transpose() * (s.ambient->mass.asDiagonal() * t.vectors);
  Mat d1 = t0.transpose() * (sa.inv00 - sb.inv00) * t0;
  Mat d2 = t0.transpose() * (sa.m01 - sb.m01) * t1;
  Mat d3 = t1.transpose() * (sa.m10 - sb.m10) * t0;
  Mat d4 = t1.transpose() * (sa.schur - sb.schur) * t1;
  double sum = 0.0;
  const Index m = t.vectors.cols();
  for (Index j = 0; j < m; ++j)
    for (Index k = 0; k < m; ++k) {
      double wjk = t.weights(j) * t.weights(k);
      double pair = 0.0;
      if (d1.size() > 0) pair += std::abs(d1(j, k));
      if (d2.size() > 0) pair += std::abs(d2(j, k));
      if (d3.size() > 0) pair += std::abs(d3(j, k));
      if (d4.size() > 0) pair += std::abs(d4(j, k));
      sum += wjk * pair;
    }
  return sum;
}

ThreeBlockReport three_block_expansion(const Mat& ambientMatrix, const Subspace& l0,
                                       const Subspace& l1, const Subspace& l2, double condCap) {
  require(same_space(l0.ambient, l1.ambient) && same_space(l1.ambient, l2.ambient),
          Err::Structural, "three_block_expansion: ambient mismatch");
  require(l0.dim() + l1.dim() + l2.dim() == l0.ambient->dim, Err::Structural,
          "three_block_expansion: split does not fill the space");
  const Mat a00 = compress_dense(ambientMatrix, l0, l0);
  const Mat a01 = compress_dense(ambientMatrix, l1, l0);
  const Mat a02 = compress_dense(ambientMatrix, l2, l0);
  const Mat a10 = compress_dense(ambientMatrix, l0, l1);
  const Mat a11 = compress_dense(ambientMatrix, l1, l1);
  const Mat a12 = compress_dense(ambientMatrix, l2, l1);
  const Mat a20 = compress_dense(ambientMatrix, l0, l2);
  const Mat a21 = compress_dense(ambientMatrix, l1, l2);
  const Mat a22 = compress_dense(ambientMatrix, l2, l2);

  require(condition_number(a00) < condCap, Err::Membership,
          "three_block_expansion: a00 block is singular");
  const Index n0 = l0.dim(), n1 = l1.dim();
  Mat corner(n0 + n1, n0 + n1);
  corner << a00, a01, a10, a11;
  require(condition_number(corner) < condCap, Err::Membership,
          "three_block_expansion: 2x2 corner is singular");

  Eigen::PartialPivLU<Mat> lu00(a00);
  const Mat inv00 = lu00.inverse();
  const Mat aS = a11 - a10 * inv00 * a01;
  require(condition_number(aS) < condCap, Err::Membership,
          "three_block_expansion: fine Schur block is singular");
  Eigen::PartialPivLU<Mat> luS(aS);
  const Mat invS = luS.inverse();

  // coarse split (L0+L1, L2) quantities, computed directly (the oracle side)
  Eigen::PartialPivLU<Mat> luCorner(corner);
  const Mat cornerInv = luCorner.inverse();
  Mat colHi(n0 + n1, a02.cols());
  colHi << a02, a12;
  Mat rowLo(a20.rows(), n0 + n1);
  rowLo << a20, a21;
  const Mat coarseM01 = luCorner.solve(colHi);
  const Mat coarseM10 = rowLo * cornerInv;
  const Mat coarseSchur = a22 - rowLo * coarseM01;

  // fine-split expansions (the proof-side formulas)
  Mat cornerInvExp(n0 + n1, n0 + n1);
  cornerInvExp.topLeftCorner(n0, n0) = inv00 + inv00 * a01 * invS * a10 * inv00;
  cornerInvExp.topRightCorner(n0, n1) = -inv00 * a01 * invS;
  cornerInvExp.bottomLeftCorner(n1, n0) = -invS * a10 * inv00;
  cornerInvExp.bottomRightCorner(n1, n1) = invS;

  Mat m10Exp(a20.rows(), n0 + n1);
  m10Exp.leftCols(n0) =
      a20 * inv00 + (a20 * inv00 * a01 - a21) * invS * a10 * inv00;
  m10Exp.rightCols(n1) = (a21 - a20 * inv00 * a01) * invS;

  Mat m01Exp(n0 + n1, a02.cols());
  m01Exp.topRows(n0) = inv00 * a02 + inv00 * a01 * invS * (a10 * inv00 * a02 - a12);
  m01Exp.bottomRows(n1) = invS * (a12 - a10 * inv00 * a02);

  const Mat schurExp =
      (a22 - a20 * inv00 * a02) + (a21 - a20 * inv00 * a01) * invS * (a10 * inv00 * a02 - a12);

  ThreeBlockReport r;
  r.scale = std::max(ambientMatrix.norm(), 1e-300);
  r.resInv = (cornerInv - cornerInvExp).norm() / r.scale;
  r.resM10 = (coarseM10 - m10Exp).norm() / r.scale;
  r.resM01 = (coarseM01 - m01Exp).norm() / r.scale;
  r.resSchur = (coarseSchur - schurExp).norm() / r.scale;
  return r;
}

}  // namespace nlhc
