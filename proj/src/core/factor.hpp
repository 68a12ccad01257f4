#pragma once

#include "types.hpp"

#include <Eigen/LU>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <functional>

namespace nlhc {

// Direct factorization of a square coordinate matrix, choosing between a
// diagonal shortcut, dense LU and sparse LU by shape and fill.
class OpFactor {
 public:
  OpFactor() = default;

  static OpFactor fromDiagonal(Vec diag) {
    OpFactor f;
    f.kind_ = Kind::Diagonal;
    f.ok_ = (diag.array().abs() > 0).all();
    f.diag_ = std::move(diag);
    return f;
  }

  // Cholesky-type path for symmetric positive definite matrices.
  static OpFactor fromSpd(const SpMat& m) {
    OpFactor f;
    f.kind_ = Kind::SparseSpd;
    auto ldlt = std::make_shared<Eigen::SimplicialLDLT<SpMat>>();
    SpMat mc = m;
    mc.makeCompressed();
    ldlt->compute(mc);
    f.ok_ = ldlt->info() == Eigen::Success &&
            (ldlt->vectorD().array() > 0).all();
    f.spd_ = std::move(ldlt);
    return f;
  }

  static OpFactor fromMatrix(const SpMat& m, Index denseCap = 1200) {
    OpFactor f;
    if (m.rows() != m.cols()) {
      f.ok_ = false;
      return f;
    }
    double fill = m.rows() ? static_cast<double>(m.nonZeros()) / (double(m.rows()) * m.cols()) : 0;
    if (m.rows() <= denseCap || fill > 0.2) {
      f.kind_ = Kind::Dense;
      f.dense_ = std::make_shared<Eigen::PartialPivLU<Mat>>(Mat(m));
      const Vec u = f.dense_->matrixLU().diagonal().cwiseAbs();
      f.ok_ = u.size() == 0 || (u.allFinite() && u.minCoeff() > 0);
    } else {
      f.kind_ = Kind::Sparse;
      auto lu = std::make_shared<Eigen::SparseLU<SpMat>>();
      SpMat mc = m;
      mc.makeCompressed();
      lu->compute(mc);
      f.ok_ = lu->info() == Eigen::Success;
      f.sparse_ = std::move(lu);
    }
    return f;
  }

  bool ok() const { return ok_; }

  Vec solve(const Vec& b) const {
    switch (kind_) {
      case Kind::Diagonal:
        return b.cwiseQuotient(diag_);
      case Kind::Dense:
        return dense_->solve(b);
      case Kind::SparseSpd:
        return spd_->solve(b);
      default:
        return sparse_->solve(b);
    }
  }

  // solves A^T x = b
  Vec solveT(const Vec& b) const {
    switch (kind_) {
      case Kind::Diagonal:
        return b.cwiseQuotient(diag_);
      case Kind::Dense:
        return dense_->transpose().solve(b);
      case Kind::SparseSpd:
        return spd_->solve(b);
      default:
        return sparse_->transpose().solve(b);
    }
  }

  Mat solve(const Mat& b) const {
    Mat out(b.rows(), b.cols());
    for (Index c = 0; c < b.cols(); ++c) out.col(c) = solve(Vec(b.col(c)));
    return out;
  }

 private:
  enum class Kind { Diagonal, Dense, Sparse, SparseSpd };
  Kind kind_ = Kind::Diagonal;
  bool ok_ = false;
  Vec diag_;
  std::shared_ptr<Eigen::PartialPivLU<Mat>> dense_;
  std::shared_ptr<Eigen::SparseLU<SpMat>> sparse_;
  std::shared_ptr<Eigen::SimplicialLDLT<SpMat>> spd_;
};

using ApplyFn = std::function<Vec(const Vec&)>;

// ||B||_2 estimate by power iteration on B^T B (Euclidean coordinates; with
// uniform masses the weighted norm agrees).
double power_norm(Index n, const ApplyFn& apply, const ApplyFn& applyT, int iters = 200,
                  std::uint64_t seed = 0x5bd1e995);

// Extreme eigenvalues of a symmetric operator by (shifted) power iteration.
double sym_max_eig(Index n, const ApplyFn& apply, int iters = 300, std::uint64_t seed = 1);
double sym_min_eig(Index n, const ApplyFn& apply, int iters = 500, std::uint64_t seed = 2);

}  // namespace nlhc
