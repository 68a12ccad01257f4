#include "solve.hpp"

#include <cmath>

namespace nlhc {

namespace {

constexpr double kSolveTol = 1e-10;

double relNorm(const HilbertSpace& s, const Vec& r, double scale) {
  return norm(s, r) / std::max(scale, 1e-300);
}

}  // namespace

struct SolverContext::CurlCache {
  std::mutex mu;
  // path (a)/(c): factor of A_F = c eps^{-1} c^T + d^T d on X1
  std::shared_ptr<OpFactor> direct;
  // path (b): factor of the (H+X1) coupled system [[eps, -c^T],[c, d^T d]]
  std::shared_ptr<OpFactor> saddle;
  bool useSaddle = false;
  bool ready = false;
};

SolverContext::SolverContext(ComplexRef cx, CoeffRef eps)
    : cx_(std::move(cx)), eps_(std::move(eps)), curl_(std::make_shared<CurlCache>()) {
  require(eps_->cx.get() == cx_.get(), Err::Structural,
          "SolverContext: coefficient was built on a different complex");
  opT_ = eps_->op.transpose();
  if (eps_->diagonal)
    epsF_ = OpFactor::fromDiagonal(eps_->op.diagonal());
  else
    epsF_ = OpFactor::fromMatrix(eps_->op);
  require(epsF_.ok(), Err::Admissibility, "SolverContext: coefficient is singular ((a1) fails)");

  SpMat n = SpMat(cx_->g.transpose() * eps_->op) * cx_->g;
  if (eps_->symmetric && eps_->alphaBound > 0 && n.rows() > 1200)
    nodeF_ = OpFactor::fromSpd(n);
  else
    nodeF_ = OpFactor::fromMatrix(n);
  require(nodeF_.ok(), Err::Admissibility,
          "SolverContext: g^T eps g is singular ((a2) fails)");
}

Vec SolverContext::epsSolve(const Vec& v) const { return epsF_.solve(v); }
Vec SolverContext::epsSolveT(const Vec& v) const { return epsF_.solveT(v); }
Vec SolverContext::nodeSolve(const Vec& f) const { return nodeF_.solve(f); }
Vec SolverContext::nodeSolveT(const Vec& f) const { return nodeF_.solveT(f); }

Vec SolverContext::applyOblique(const Vec& v) const {
  return cx_->g * nodeSolve(cx_->g.transpose() * (eps_->op * v));
}

Vec SolverContext::xEpsFromHarmonic(const Vec& x) const { return x - applyOblique(x); }

double SolverContext::curlRangeDefect(const Vec& g) const {
  double ng = norm(cx_->x1, g);
  if (ng == 0) return 0.0;
  Vec proj = cx_->c * (cx_->c.transpose() * cx_->faceFactor().solve(g));
  return norm(cx_->x1, Vec(g - proj)) / ng;
}

Vec SolverContext::curlSolve(const Vec& rhs) const {
  const GridComplex& cx = *cx_;
  require(rhs.size() == cx.x1->dim, Err::Structural, "curlSolve: rhs size mismatch");
  {
    std::lock_guard<std::mutex> lock(curl_->mu);
    if (!curl_->ready) {
      const Index nH = cx.h->dim, nF = cx.x1->dim;
      SpMat dtd = SpMat(cx.d.transpose()) * cx.d;
      if (eps_->diagonal) {
        Vec invDiag = eps_->op.diagonal().cwiseInverse();
        SpMat af = cx.c * SpMat(invDiag.asDiagonal()) * SpMat(cx.c.transpose());
        af = af + dtd;
        auto f = std::make_shared<OpFactor>(
            eps_->symmetric && nF > 1200 ? OpFactor::fromSpd(af) : OpFactor::fromMatrix(af));
        require(f->ok(), Err::Admissibility, "curlSolve: curl system factorization failed");
        curl_->direct = std::move(f);
      } else {
        double fill = static_cast<double>(eps_->op.nonZeros()) / (double(nH) * nH);
        if (fill > 0.05 || nH <= 1200) {
          // dense route for convolution-type operators
          require(nH <= 6000, Err::Solve,
                  "curlSolve: dense coefficient too large for the dense route");
          Mat inv = Mat(eps_->op).partialPivLu().inverse();
          Mat af = Mat(cx.c) * inv * Mat(cx.c).transpose() + Mat(dtd);
          auto f = std::make_shared<OpFactor>(OpFactor::fromMatrix(af.sparseView()));
          require(f->ok(), Err::Admissibility, "curlSolve: curl system factorization failed");
          curl_->direct = std::move(f);
        } else {
          // coupled sparse route: [[eps, -c^T],[c, d^T d]] [w;F] = [0; rhs]
          std::vector<Triplet> trip;
          trip.reserve(eps_->op.nonZeros() + 2 * cx.c.nonZeros() + dtd.nonZeros());
          for (Index k = 0; k < eps_->op.outerSize(); ++k)
            for (SpMat::InnerIterator it(eps_->op, k); it; ++it)
              trip.emplace_back(it.row(), it.col(), it.value());
          for (Index k = 0; k < cx.c.outerSize(); ++k)
            for (SpMat::InnerIterator it(cx.c, k); it; ++it) {
              trip.emplace_back(it.col(), nH + it.row(), -it.value());  // -c^T
              trip.emplace_back(nH + it.row(), it.col(), it.value());   // c
            }
          for (Index k = 0; k < dtd.outerSize(); ++k)
            for (SpMat::InnerIterator it(dtd, k); it; ++it)
              trip.emplace_back(nH + it.row(), nH + it.col(), it.value());
          SpMat sys(nH + nF, nH + nF);
          sys.setFromTriplets(trip.begin(), trip.end());
          auto f = std::make_shared<OpFactor>(OpFactor::fromMatrix(sys, 0));
          require(f->ok(), Err::Admissibility, "curlSolve: coupled curl factorization failed");
          curl_->saddle = std::move(f);
          curl_->useSaddle = true;
        }
      }
      curl_->ready = true;
    }
  }

  auto applyA = [&](const Vec& f) {
    return Vec(cx.c * epsSolve(cx.c.transpose() * f) +
               cx.d.transpose() * (cx.d * f));
  };
  Vec F;
  if (curl_->useSaddle) {
    Vec full = Vec::Zero(cx.h->dim + cx.x1->dim);
    full.tail(cx.x1->dim) = rhs;
    F = curl_->saddle->solve(full).tail(cx.x1->dim);
  } else {
    F = curl_->direct->solve(rhs);
  }
  // one refinement step keeps the residual contract comfortably
  Vec r = rhs - applyA(F);
  double rel = relNorm(*cx.x1, r, norm(cx.x1, rhs));
  if (rel > 1e-12) {
    if (curl_->useSaddle) {
      Vec full = Vec::Zero(cx.h->dim + cx.x1->dim);
      full.tail(cx.x1->dim) = r;
      F += curl_->saddle->solve(full).tail(cx.x1->dim);
    } else {
      F += curl_->direct->solve(r);
    }
    rel = relNorm(*cx.x1, Vec(rhs - applyA(F)), norm(cx.x1, rhs));
  }
  require(rel <= 1e-8, Err::Solve, "curlSolve: residual contract violated");
  return F;
}

Vec reduced_solve_grad(const SolverContext& s, const Vec& f) {
  const GridComplex& cx = s.cx();
  require(f.size() == cx.x0->dim, Err::Structural, "reduced_solve_grad: size mismatch");
  Vec u = s.nodeSolve(f);
  auto residual = [&](const Vec& uu) {
    return Vec(f - cx.g.transpose() * s.epsApply(cx.g * uu));
  };
  Vec r = residual(u);
  double scale = norm(cx.x0, f);
  if (scale > 0 && relNorm(*cx.x0, r, scale) > 1e-12) u += s.nodeSolve(r);
  require(scale == 0 || relNorm(*cx.x0, residual(u), scale) <= kSolveTol, Err::Solve,
          "reduced_solve_grad: residual contract violated");
  return u;
}

Vec reduced_solve_curl(const SolverContext& s, const Vec& g) {
  const GridComplex& cx = s.cx();
  require(g.size() == cx.x1->dim, Err::Structural, "reduced_solve_curl: size mismatch");
  require(s.curlRangeDefect(g) <= 1e-8, Err::Data,
          "reduced_solve_curl: right-hand side outside ran(curl-circ)");
  Vec F = s.curlSolve(g);
  double scale = norm(cx.x1, g);
  double rel = scale == 0 ? 0.0
                          : relNorm(*cx.x1,
                                    Vec(g - (cx.c * s.epsSolve(cx.c.transpose() * F) +
                                             cx.d.transpose() * (cx.d * F))),
                                    scale);
  require(rel <= kSolveTol, Err::Solve, "reduced_solve_curl: residual contract violated");
  return F;
}

Decomposition helmholtz_decompose(const SolverContext& s, const Vec& e) {
  const GridComplex& cx = s.cx();
  require(e.size() == cx.h->dim, Err::Structural, "helmholtz_decompose: size mismatch");
  Decomposition d;
  d.potential = s.nodeSolve(cx.g.transpose() * s.epsApply(e));
  // the curl datum pairs the field itself against curls, which is what makes
  // the remainder land in ker(c)
  d.curlPart = s.curlSolve(cx.c * e);
  d.remainder = e - cx.g * d.potential - s.epsSolve(cx.c.transpose() * d.curlPart);
  return d;
}

Decomposition helmholtz_decompose_dual(const SolverContext& s, const Vec& hField) {
  const GridComplex& cx = s.cx();
  require(hField.size() == cx.h->dim, Err::Structural,
          "helmholtz_decompose_dual: size mismatch");
  Decomposition d;
  d.potential = s.nodeSolve(cx.g.transpose() * hField);
  d.curlPart = s.curlSolve(cx.c * s.epsSolve(hField));
  d.remainder = hField - s.epsApply(cx.g * d.potential) - cx.c.transpose() * d.curlPart;
  return d;
}

Vec project_harmonic(const SolverContext& s, const Vec& v, HarmonicKind kind) {
  switch (kind) {
    case HarmonicKind::Dirichlet:
      return s.cx().projectHarmonic(v);
    case HarmonicKind::Eps:
      return helmholtz_decompose(s, v).remainder;
    default:
      return helmholtz_decompose_dual(s, v).remainder;
  }
}

SolveResult solve_electrostatics(const SolverContext& s, const ElectrostaticData& data) {
  const GridComplex& cx = s.cx();
  require(data.f.size() == cx.x0->dim && data.g.size() == cx.x1->dim &&
              data.x.size() == cx.h->dim,
          Err::Structural, "solve_electrostatics: data sizes mismatch");
  require(s.curlRangeDefect(data.g) <= 1e-8, Err::Data,
          "solve_electrostatics: g outside ran(curl-circ)");

  const double nx = norm(cx.h, data.x);
  const double opScale = 6.0 / cx.domain.h;  // incidence-operator norm scale
  auto requireIn = [&](const Vec& r0, const Vec& r1, const char* what) {
    bool ok = norm(cx.x0, r0) <= 1e-8 * nx * opScale + 1e-14 &&
              norm(cx.x1, r1) <= 1e-8 * nx * opScale + 1e-14;
    require(ok, Err::Data, what);
  };

  SolveResult out;
  out.potential = reduced_solve_grad(s, data.f);
  out.curlPart = reduced_solve_curl(s, data.g);

  if (data.formulation == Formulation::PDual) {
    // x is x^eps in H^eps: div x = 0, c eps^{-1} x = 0
    if (nx > 0)
      requireIn(Vec(cx.g.transpose() * data.x), Vec(cx.c * s.epsSolve(data.x)),
                "solve_electrostatics: datum not in H^eps");
    out.harmonicPart = data.x;
    out.field = s.epsApply(cx.g * out.potential) + cx.c.transpose() * out.curlPart +
                out.harmonicPart;
    double sf = norm(cx.x0, data.f), sg = norm(cx.x1, data.g);
    out.resDiv = relNorm(*cx.x0, Vec(data.f - cx.g.transpose() * out.field),
                         std::max(sf, norm(cx.h, out.field)));
    out.resCurl = relNorm(*cx.x1, Vec(data.g - cx.c * s.epsSolve(out.field)),
                          std::max(sg, norm(cx.h, out.field)));
    Vec piEps = project_harmonic(s, out.field, HarmonicKind::EpsDual);
    out.resHarm = relNorm(*cx.h, Vec(piEps - data.x), std::max(1.0, nx));
    return out;
  }

  Vec xeps;
  if (data.formulation == Formulation::P) {
    // x is x_eps in H_eps: div eps x = 0, c x = 0
    if (nx > 0)
      requireIn(Vec(cx.g.transpose() * s.epsApply(data.x)), Vec(cx.c * data.x),
                "solve_electrostatics: datum not in H_eps");
    xeps = data.x;
  } else {
    // PiDNormalized: x lies in H_D; x_eps = (1 - S) x
    if (nx > 0)
      requireIn(Vec(cx.g.transpose() * data.x), Vec(cx.c * data.x),
                "solve_electrostatics: datum not in H_D");
    xeps = s.xEpsFromHarmonic(data.x);
  }
  out.harmonicPart = xeps;
  out.field = cx.g * out.potential + s.epsSolve(cx.c.transpose() * out.curlPart) + xeps;

  double sf = norm(cx.x0, data.f), sg = norm(cx.x1, data.g);
  double se = norm(cx.h, out.field);
  out.resDiv =
      relNorm(*cx.x0, Vec(data.f - cx.g.transpose() * s.epsApply(out.field)), std::max(sf, se));
  out.resCurl = relNorm(*cx.x1, Vec(data.g - cx.c * out.field), std::max(sg, se));
  if (data.formulation == Formulation::P) {
    Vec piEps = project_harmonic(s, out.field, HarmonicKind::Eps);
    out.resHarm = relNorm(*cx.h, Vec(piEps - data.x), std::max(1.0, nx));
  } else {
    Vec piDpiEps = cx.projectHarmonic(project_harmonic(s, out.field, HarmonicKind::Eps));
    out.resHarm = relNorm(*cx.h, Vec(piDpiEps - data.x), std::max(1.0, nx));
  }
  return out;
}

}  // namespace nlhc
