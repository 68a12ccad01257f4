#pragma once

#include "complex.hpp"
#include "factor.hpp"

#include <functional>

namespace nlhc {

enum class CoeffKind { Multiplication, Convolution, BlockStructured, Custom };

// Coefficient operator on the field space H.
struct Coefficient {
  ComplexRef cx;
  CoeffKind kind = CoeffKind::Custom;
  SpMat op;                // coordinate matrix on H
  bool diagonal = false;
  bool symmetric = false;
  double alphaBound = 0;   // constructed lower bound on the symmetric part
  int n = 0;               // dilation index (convolution families)
  double ell1 = 0;         // discrete l1 quadrature norm of the kernel part
  std::string descr;

  Vec apply(const Vec& v) const { return op * v; }
};

using CoeffRef = std::shared_ptr<const Coefficient>;

using TensorField = std::function<Eigen::Matrix3d(int, int, int)>;  // per voxel

Coefficient identity_coefficient(ComplexRef cx);

// Cellwise tensor coefficient. Diagonal tensors sample the edge midpoint
// (mean of the four surrounding voxels); full tensors use the
// coercivity-preserving splitting  eps = alpha I + P^T (eps_c - alpha I) P
// with the 1/4-weighted edge-to-cell averaging P, ||P|| <= 1.
// Throws CoercivityError when a voxel tensor violates sym >= alpha.
Coefficient multiplication_coefficient(ComplexRef cx, const TensorField& tensor, double alpha);

Coefficient constant_tensor_coefficient(ComplexRef cx, const Eigen::Matrix3d& t, double alpha);

struct Kernel {
  std::function<double(double, double, double)> rho;
  std::string name;
};

Kernel gaussian_kernel(double sigma, double amplitude);

// eps = id + K_n where K_n convolves each edge-direction component with the
// samples h^3 rho(n * offset). Throws CoercivityError when the discrete l1
// norm reaches 1.
Coefficient convolution_coefficient(ComplexRef cx, const Kernel& kernel, int n);

// Scales the kernel amplitude so that the n = 1 discrete l1 norm equals
// targetEll1 on this complex.
Kernel normalize_kernel_ell1(ComplexRef cx, const Kernel& kernel, double targetEll1);

// Componentwise convolution applied through zero-padded FFTs; agrees with the
// assembled operator and serves the wide-support path.
Vec convolution_apply_fft(const GridComplex& cx, const Kernel& kernel, int n, const Vec& v);

Coefficient custom_coefficient(ComplexRef cx, SpMat op, const std::string& descr);

// Two-phase medium layered along `axis` with period 1/n of the domain length,
// aMinus first. Cells straddling a phase jump get the exact volume-fraction
// composite (harmonic along the axis, arithmetic transverse), so the discrete
// medium keeps the 50/50 fractions at every n.
Coefficient layered_coefficient(ComplexRef cx, double aMinus, double aPlus, int nOsc,
                                int axis = 0);

// Classical layered H-limit: harmonic mean along the axis, arithmetic mean
// transverse (equal volume fractions).
Eigen::Matrix3d layered_limit_tensor(double aMinus, double aPlus, int axis = 0);

Coefficient random_coercive_coefficient(ComplexRef cx, std::uint64_t seed, double alpha);

// Coefficient family / file parsing ("identity", "layered A B [axis]",
// "convolution gaussian SIGMA ELL1 N", "random-coercive SEED ALPHA",
// "tensor-json PATH" or inline json).
Coefficient parse_coefficient(ComplexRef cx, const std::string& spec);

struct AdmissibilityReport {
  bool a1 = false, a2 = false, a3 = false;
  double cond1 = 0, cond2 = 0, cond3 = 0;  // eps, iota* eps iota, kappa* eps^-1 kappa
  double alpha = 0;                        // min eig of sym(eps)
  double beta = 0;                         // 1 / min eig of sym(eps^-1)
  bool admissible() const { return a1 && a2 && a3; }
};

// (a1) eps invertible, (a2) compression to ran(g) invertible, (a3)
// compression of eps^{-1} to ran(c^T) invertible; condition numbers against
// the cap decide. Never throws for report purposes.
AdmissibilityReport admissibility_check(const Coefficient& eps, double condCap = kCondCap);

}  // namespace nlhc
