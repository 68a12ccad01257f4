#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <memory>
#include <stdexcept>
#include <string>

namespace nlhc {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;
using Index = Eigen::Index;
using Triplet = Eigen::Triplet<double>;

enum class Err {
  Structural,        // shape/dimension mismatch
  Membership,        // operator not in M(H0,H1)
  DegenerateDomain,  // voxel domain without interior dofs
  Coercivity,        // coefficient violates its lower bound
  Admissibility,     // (a1)/(a2)/(a3) failure where required
  Data,              // right-hand side outside its admissible set
  Solve,             // factorization/residual failure
  Parse,             // malformed input text
  Internal,
};

class Error : public std::runtime_error {
 public:
  Error(Err code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Err code() const { return code_; }

 private:
  Err code_;
};

[[noreturn]] inline void fail(Err code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, Err code, const std::string& what) {
  if (!ok) fail(code, what);
}

// Invertibility threshold shared by membership and admissibility checks.
inline constexpr double kCondCap = 1e12;

// Singular values below kRankTol * sigma_max count as zero.
inline constexpr double kRankTol = 1e-10;

// Dense factorizations are used up to this dimension, sparse ones above.
inline constexpr Index kDenseCap = 2000;

}  // namespace nlhc
