#pragma once

#include "coefficient.hpp"

namespace nlhc {

enum class Formulation { P, PDual, PiDNormalized };
enum class HarmonicKind { Dirichlet, Eps, EpsDual };

struct ElectrostaticData {
  Vec f;  // X0 Riesz representative
  Vec g;  // X1 Riesz representative, must lie in ran(c)
  Vec x;  // harmonic datum: x_eps (P), x^eps (PDual) or x in H_D (PiDNormalized)
  Formulation formulation = Formulation::PiDNormalized;
};

struct SolveResult {
  Vec field;         // E (P / PiDNormalized) or H (PDual)
  Vec potential;     // u in X0
  Vec curlPart;      // F in X1, the ran(c) representative
  Vec harmonicPart;  // in H
  double resDiv = 0, resCurl = 0, resHarm = 0;
  double resMax() const { return std::max(resDiv, std::max(resCurl, resHarm)); }
};

struct Decomposition {
  Vec potential;  // u
  Vec curlPart;   // F
  Vec remainder;  // x_eps / x^eps
};

// Factorization cache for one (complex, coefficient) pair. Construction
// factorizes the node system; the curl system is factorized on first use.
// Immutable after construction apart from the internal caches; concurrent
// solves against a built context are safe.
class SolverContext {
 public:
  SolverContext(ComplexRef cx, CoeffRef eps);

  const GridComplex& cx() const { return *cx_; }
  const Coefficient& eps() const { return *eps_; }
  ComplexRef cxRef() const { return cx_; }
  CoeffRef epsRef() const { return eps_; }

  Vec epsApply(const Vec& v) const { return eps_->op * v; }
  Vec epsApplyT(const Vec& v) const { return opT_ * v; }
  Vec epsSolve(const Vec& v) const;
  Vec epsSolveT(const Vec& v) const;

  // (g^T eps g)^{-1}
  Vec nodeSolve(const Vec& f) const;
  Vec nodeSolveT(const Vec& f) const;

  // F in ran(c) with  c eps^{-1} c^T F = rhs;  rhs must lie in ran(c).
  Vec curlSolve(const Vec& rhs) const;

  // oblique projection S = g (g^T eps g)^{-1} g^T eps onto ran(g)
  Vec applyOblique(const Vec& v) const;
  // x_eps = (1 - S) x for x in H_D
  Vec xEpsFromHarmonic(const Vec& x) const;

  // distance of g to ran(c), relative; used for DataError checks
  double curlRangeDefect(const Vec& g) const;

 private:
  ComplexRef cx_;
  CoeffRef eps_;
  SpMat opT_;
  OpFactor epsF_;
  OpFactor nodeF_;

  struct CurlCache;
  std::shared_ptr<CurlCache> curl_;
};

using SolverRef = std::shared_ptr<SolverContext>;

Vec reduced_solve_grad(const SolverContext& s, const Vec& f);
Vec reduced_solve_curl(const SolverContext& s, const Vec& g);

// E = g u + eps^{-1} c^T F + x_eps via the constructive decomposition proof.
Decomposition helmholtz_decompose(const SolverContext& s, const Vec& e);
// H = eps g u + c^T F + x^eps.
Decomposition helmholtz_decompose_dual(const SolverContext& s, const Vec& hField);

Vec project_harmonic(const SolverContext& s, const Vec& v, HarmonicKind kind);

SolveResult solve_electrostatics(const SolverContext& s, const ElectrostaticData& data);

}  // namespace nlhc
