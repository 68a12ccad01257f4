#pragma once

#include "blocks.hpp"
#include "coefficient.hpp"

namespace nlhc {

// Orthogonal split of the field space given through an injective sparse
// "potential" matrix p with H0 = ran(p); avoids materializing orthonormal
// bases at grid scale.
class GridSplit {
 public:
  enum class Kind { GradKerDiv, CurlPerpCurl };

  GridSplit(ComplexRef cx, Kind kind);

  const SpMat& potential() const { return p_; }
  ComplexRef complexRef() const { return cx_; }
  Kind kind() const { return kind_; }

  Vec projectH0(const Vec& v) const;  // p (p^T p)^{-1} p^T v

 private:
  ComplexRef cx_;
  Kind kind_;
  SpMat p_;
  OpFactor lp_;
};

// Ambient realizations iota_j m iota_k^* of the four Schur-topology maps of a
// coefficient w.r.t. a grid split; pairings against ambient vectors equal the
// sub-block compressed pairings.
class GridSchurMaps {
 public:
  GridSchurMaps(const GridSplit& split, const Coefficient& eps);

  Vec mapInv00(const Vec& v) const;  // p Np^{-1} p^T
  Vec mapM01(const Vec& v) const;    // S - pi0
  Vec mapM10(const Vec& v) const;    // (1 - pi0) eps A1
  Vec mapSchur(const Vec& v) const;  // eps (1 - S)

  Vec oblique(const Vec& v) const;  // S = A1 eps

 private:
  const GridSplit* split_;
  const Coefficient* eps_;
  OpFactor np_;  // p^T eps p
};

// Sum_{j,k} w_j w_k sum_maps |<t_j, (m_a - m_b) t_k>| over the four maps.
double grid_schur_distance(const GridSplit& split, const Coefficient& a, const Coefficient& b,
                           const TestFamily& t);

}  // namespace nlhc
