#pragma once

#include "subspace.hpp"

#include <array>
#include <cstdint>

namespace nlhc {

// Orthogonal decomposition ambient = H0 (+) H1.
struct BlockSplit {
  SpaceRef ambient;
  Subspace h0;
  Subspace h1;
};

BlockSplit make_split(Subspace h0, Subspace h1);
BlockSplit split_from_h0(Subspace h0);

// 2x2 block decomposition a_jk = iota_j^* a iota_k in the split's bases.
// Coordinates are Euclidean (the bases are mass-orthonormal).
struct BlockOperator {
  std::shared_ptr<const BlockSplit> split;
  Mat a00, a01, a10, a11;
};

BlockOperator block_operator(std::shared_ptr<const BlockSplit> split, const Mat& ambientMatrix);
BlockOperator block_operator(std::shared_ptr<const BlockSplit> split, const LinearMap& a);
BlockOperator block_operator_from_parts(std::shared_ptr<const BlockSplit> split, Mat a00, Mat a01,
                                        Mat a10, Mat a11);

// Ambient coordinate matrix sum_jk iota_j a_jk iota_k^*.
Mat assemble(const BlockOperator& a);

double condition_number(const Mat& m);

// a in M(H0,H1): a00 and a invertible below the condition cap.
bool is_member(const BlockOperator& a, double condCap = kCondCap);

// The four maps generating the nonlocal H-topology.
struct SchurData {
  Mat inv00;  // a00^{-1}
  Mat m01;    // a00^{-1} a01
  Mat m10;    // a10 a00^{-1}
  Mat schur;  // a11 - a10 a00^{-1} a01
};

SchurData schur_data(const BlockOperator& a, double condCap = kCondCap);

// Residual of the unitriangular factorization L a U = diag(a00, a_S).
double schur_factorization_residual(const BlockOperator& a, const SchurData& sd);

Mat block_inverse_matrix(const BlockOperator& a, double condCap = kCondCap);
LinearMap block_inverse(const BlockOperator& a, double condCap = kCondCap);

// Residuals of the four inversion identities relating the Schur maps of a
// w.r.t. (H0,H1) with those of a^{-1} w.r.t. (H1,H0).
struct DualityReport {
  double resSchur;   // ||[a^-1]_11^-1 - a_S||
  double resM10;     // ||[a^-1]_11^-1 [a^-1]_10 + a10 a00^-1||
  double resM01;     // ||[a^-1]_01 [a^-1]_11^-1 + a00^-1 a01||
  double resInv00;   // ||([a^-1]_00 - [a^-1]_01 [a^-1]_11^-1 [a^-1]_10) - a00^-1||
  double scale;      // ||a||
  double max() const { return std::max(std::max(resSchur, resM10), std::max(resM01, resInv00)); }
};

DualityReport inversion_duality(const BlockOperator& a, double condCap = kCondCap);

double tau_bound(const BlockOperator& a, double condCap = kCondCap);

// Finite family of mass-orthonormal vectors with summable positive weights;
// realizes weak-operator pairings as a reproducible pseudo-metric.
struct TestFamily {
  SpaceRef space;
  Mat vectors;  // columns, mass-orthonormal
  Vec weights;  // strictly positive, sum <= 1
};

TestFamily make_test_family(SpaceRef space, const Mat& rawVectors);
TestFamily default_test_family(SpaceRef space, Index modes, Index randoms, std::uint64_t seed);

double schur_distance(const BlockOperator& a, const BlockOperator& b, const TestFamily& t,
                      double condCap = kCondCap);

// Residuals of the four expanded identities appearing when a 2x2 split is
// refined into three blocks L0, L1, L2 (coarse split (L0+L1, L2) expressed
// through fine-split quantities).
struct ThreeBlockReport {
  double resInv;    // corner inverse identity
  double resM10;    // coarse a10 a00^{-1}
  double resM01;    // coarse a00^{-1} a01
  double resSchur;  // coarse Schur complement
  double scale;
  double max() const { return std::max(std::max(resInv, resM10), std::max(resM01, resSchur)); }
};

ThreeBlockReport three_block_expansion(const Mat& ambientMatrix, const Subspace& l0,
                                       const Subspace& l1, const Subspace& l2,
                                       double condCap = kCondCap);

}  // namespace nlhc
