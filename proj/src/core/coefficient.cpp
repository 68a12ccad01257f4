#include "coefficient.hpp"

#include <json.hpp>
#include <unsupported/Eigen/FFT>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <complex>
#include <fstream>
#include <random>
#include <sstream>
#include <unordered_map>

namespace nlhc {

namespace {

double symMinEig3(const Eigen::Matrix3d& t) {
  Eigen::Matrix3d s = 0.5 * (t + t.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(s);
  return eig.eigenvalues().minCoeff();
}

bool isDiagonal3(const Eigen::Matrix3d& t) {
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c)
      if (r != c && t(r, c) != 0.0) return false;
  return true;
}

}  // namespace

Coefficient identity_coefficient(ComplexRef cx) {
  Coefficient eps;
  eps.cx = cx;
  eps.kind = CoeffKind::Multiplication;
  eps.op.resize(cx->h->dim, cx->h->dim);
  eps.op.setIdentity();
  eps.diagonal = true;
  eps.symmetric = true;
  eps.alphaBound = 1.0;
  eps.descr = "identity";
  return eps;
}

Coefficient multiplication_coefficient(ComplexRef cx, const TensorField& tensor, double alpha) {
  require(alpha > 0, Err::Coercivity, "multiplication_coefficient: alpha must be positive");
  const GridComplex& g = *cx;
  const int nx = g.domain.nx, ny = g.domain.ny, nz = g.domain.nz;

  bool allDiagonal = true;
  for (const auto& cell : g.cellAt) {
    Eigen::Matrix3d t = tensor(cell[0], cell[1], cell[2]);
    require(symMinEig3(t) >= alpha - 1e-12, Err::Coercivity,
            "multiplication_coefficient: voxel tensor violates the coercivity bound");
    if (!isDiagonal3(t)) allDiagonal = false;
  }
  (void)nx;
  (void)ny;
  (void)nz;

  Coefficient eps;
  eps.cx = cx;
  eps.kind = CoeffKind::Multiplication;
  eps.symmetric = true;
  eps.alphaBound = alpha;

  if (allDiagonal) {
    // midpoint sampling: mean of the four voxels sharing the edge
    Vec diag(g.h->dim);
    for (size_t e = 0; e < g.edgeAt.size(); ++e) {
      auto [dir, i, j, k] = g.edgeAt[e];
      double v = 0.0;
      auto add = [&](int ci, int cj, int ck) { v += tensor(ci, cj, ck)(dir, dir); };
      if (dir == 0) {
        add(i, j - 1, k - 1), add(i, j, k - 1), add(i, j - 1, k), add(i, j, k);
      } else if (dir == 1) {
        add(i - 1, j, k - 1), add(i, j, k - 1), add(i - 1, j, k), add(i, j, k);
      } else {
        add(i - 1, j - 1, k), add(i, j - 1, k), add(i - 1, j, k), add(i, j, k);
      }
      diag(static_cast<Index>(e)) = 0.25 * v;
    }
    eps.diagonal = true;
    eps.op = SpMat(diag.asDiagonal());
    bool sym = true;
    for (const auto& cell : g.cellAt) {
      Eigen::Matrix3d t = tensor(cell[0], cell[1], cell[2]);
      if ((t - t.transpose()).cwiseAbs().maxCoeff() > 0) sym = false;
    }
    eps.symmetric = sym;
    eps.descr = "multiplication(diagonal)";
    return eps;
  }

  // eps = alpha I + P^T (eps_c - alpha I) P with 1/4-weighted edge-to-cell
  // averaging; Schur test gives ||P|| <= 1, so sym(eps) >= alpha stays exact.
  std::vector<Triplet> trip;
  trip.reserve(g.cellAt.size() * 150 + g.h->dim);
  for (Index e = 0; e < g.h->dim; ++e) trip.emplace_back(e, e, alpha);
  bool sym = true;
  for (const auto& cell : g.cellAt) {
    const int i = cell[0], j = cell[1], k = cell[2];
    Eigen::Matrix3d b = tensor(i, j, k);
    if ((b - b.transpose()).cwiseAbs().maxCoeff() > 0) sym = false;
    b -= alpha * Eigen::Matrix3d::Identity();
    // the cell's four edges per direction
    std::array<std::array<Index, 4>, 3> edges{};
    for (int s = 0; s < 4; ++s) {
      int a = s & 1, bb = (s >> 1) & 1;
      edges[0][s] = g.edgeDofAt(0, i, j + a, k + bb);
      edges[1][s] = g.edgeDofAt(1, i + a, j, k + bb);
      edges[2][s] = g.edgeDofAt(2, i + a, j + bb, k);
    }
    for (int s1 = 0; s1 < 3; ++s1)
      for (int s2 = 0; s2 < 3; ++s2) {
        if (b(s1, s2) == 0.0) continue;
        for (int e1 = 0; e1 < 4; ++e1)
          for (int e2 = 0; e2 < 4; ++e2) {
            if (edges[s1][e1] < 0 || edges[s2][e2] < 0) continue;
            trip.emplace_back(edges[s1][e1], edges[s2][e2], 0.0625 * b(s1, s2));
          }
      }
  }
  eps.op.resize(g.h->dim, g.h->dim);
  eps.op.setFromTriplets(trip.begin(), trip.end());
  eps.diagonal = false;
  eps.symmetric = sym;
  eps.descr = "multiplication(tensor)";
  return eps;
}

Coefficient constant_tensor_coefficient(ComplexRef cx, const Eigen::Matrix3d& t, double alpha) {
  return multiplication_coefficient(
      cx, [t](int, int, int) { return t; }, alpha);
}

Kernel gaussian_kernel(double sigma, double amplitude) {
  require(sigma > 0, Err::Structural, "gaussian_kernel: sigma must be positive");
  Kernel k;
  k.name = "gaussian";
  k.rho = [sigma, amplitude](double x, double y, double z) {
    return amplitude * std::exp(-(x * x + y * y + z * z) / (2.0 * sigma * sigma));
  };
  return k;
}

namespace {

struct OffsetTable {
  int rx, ry, rz;  // offsets range over [-rx,rx] x ...
  std::vector<double> w;
  double ell1 = 0, wmax = 0;
  int sxLo = 0, sxHi = 0, syLo = 0, syHi = 0, szLo = 0, szHi = 0;  // truncated support

  double at(int di, int dj, int dk) const {
    return w[static_cast<size_t>(di + rx) +
             static_cast<size_t>(2 * rx + 1) *
                 (static_cast<size_t>(dj + ry) + static_cast<size_t>(2 * ry + 1) * (dk + rz))];
  }
};

OffsetTable sample_kernel(const GridComplex& cx, const Kernel& kernel, int n) {
  OffsetTable t;
  t.rx = cx.domain.nx;
  t.ry = cx.domain.ny;
  t.rz = cx.domain.nz;
  const double h = cx.domain.h;
  const double vol = h * h * h;
  t.w.resize(static_cast<size_t>(2 * t.rx + 1) * (2 * t.ry + 1) * (2 * t.rz + 1));
  size_t pos = 0;
  for (int dk = -t.rz; dk <= t.rz; ++dk)
    for (int dj = -t.ry; dj <= t.ry; ++dj)
      for (int di = -t.rx; di <= t.rx; ++di) {
        double v = vol * kernel.rho(n * h * di, n * h * dj, n * h * dk);
        t.w[pos++] = v;
        t.ell1 += std::abs(v);
        t.wmax = std::max(t.wmax, std::abs(v));
      }
  double cut = 1e-16 * t.wmax;
  auto significant = [&](int di, int dj, int dk) { return std::abs(t.at(di, dj, dk)) > cut; };
  for (int dk = -t.rz; dk <= t.rz; ++dk)
    for (int dj = -t.ry; dj <= t.ry; ++dj)
      for (int di = -t.rx; di <= t.rx; ++di)
        if (significant(di, dj, dk)) {
          t.sxLo = std::min(t.sxLo, di), t.sxHi = std::max(t.sxHi, di);
          t.syLo = std::min(t.syLo, dj), t.syHi = std::max(t.syHi, dj);
          t.szLo = std::min(t.szLo, dk), t.szHi = std::max(t.szHi, dk);
        }
  return t;
}

}  // namespace

Coefficient convolution_coefficient(ComplexRef cx, const Kernel& kernel, int n) {
  require(n >= 1, Err::Structural, "convolution_coefficient: n must be >= 1");
  const GridComplex& g = *cx;
  OffsetTable tab = sample_kernel(g, kernel, n);
  require(tab.ell1 < 1.0, Err::Coercivity,
          "convolution_coefficient: discrete l1 norm reaches 1, operator may lose coercivity");

  double cut = 1e-16 * tab.wmax;
  std::vector<Triplet> trip;
  trip.reserve(g.h->dim * 8);
  for (Index e = 0; e < g.h->dim; ++e) trip.emplace_back(e, e, 1.0);
  for (Index e = 0; e < g.h->dim; ++e) {
    auto [dir, i, j, k] = g.edgeAt[static_cast<size_t>(e)];
    for (int dk = tab.szLo; dk <= tab.szHi; ++dk)
      for (int dj = tab.syLo; dj <= tab.syHi; ++dj)
        for (int di = tab.sxLo; di <= tab.sxHi; ++di) {
          double w = tab.at(di, dj, dk);
          if (std::abs(w) <= cut) continue;
          Index e2 = g.edgeDofAt(dir, i - di, j - dj, k - dk);
          if (e2 >= 0) trip.emplace_back(e, e2, w);
        }
  }
  Coefficient eps;
  eps.cx = cx;
  eps.kind = CoeffKind::Convolution;
  eps.op.resize(g.h->dim, g.h->dim);
  eps.op.setFromTriplets(trip.begin(), trip.end());
  eps.diagonal = false;
  // even kernels give symmetric operators; detect cheaply from the samples
  bool even = true;
  for (int dk = tab.szLo; dk <= tab.szHi && even; ++dk)
    for (int dj = tab.syLo; dj <= tab.syHi && even; ++dj)
      for (int di = tab.sxLo; di <= tab.sxHi && even; ++di)
        if (std::abs(tab.at(di, dj, dk) - tab.at(-di, -dj, -dk)) > 1e-15 * (tab.wmax + 1e-300))
          even = false;
  eps.symmetric = even;
  eps.alphaBound = 1.0 - tab.ell1;
  eps.n = n;
  eps.ell1 = tab.ell1;
  eps.descr = "convolution(" + kernel.name + ", n=" + std::to_string(n) + ")";
  return eps;
}

Kernel normalize_kernel_ell1(ComplexRef cx, const Kernel& kernel, double targetEll1) {
  require(targetEll1 > 0 && targetEll1 < 1, Err::Coercivity,
          "normalize_kernel_ell1: target must lie in (0,1)");
  OffsetTable tab = sample_kernel(*cx, kernel, 1);
  require(tab.ell1 > 0, Err::Structural, "normalize_kernel_ell1: kernel vanishes on the grid");
  double scale = targetEll1 / tab.ell1;
  Kernel out;
  out.name = kernel.name;
  auto rho = kernel.rho;
  out.rho = [rho, scale](double x, double y, double z) { return scale * rho(x, y, z); };
  return out;
}

Vec convolution_apply_fft(const GridComplex& cx, const Kernel& kernel, int n, const Vec& v) {
  require(v.size() == cx.h->dim, Err::Structural, "convolution_apply_fft: size mismatch");
  OffsetTable tab = sample_kernel(cx, kernel, n);
  using Cplx = std::complex<double>;
  Eigen::FFT<double> fft;
  Vec out = v;  // identity part

  auto nextSize = [](int need) {
    int p = 1;
    while (p < need) p <<= 1;
    return p;
  };

  for (int dir = 0; dir < 3; ++dir) {
    // bounding index ranges of this direction's dofs
    int gx = cx.domain.nx + 1, gy = cx.domain.ny + 1, gz = cx.domain.nz + 1;
    int sx = std::max(-tab.sxLo, tab.sxHi), sy = std::max(-tab.syLo, tab.syHi),
        sz = std::max(-tab.szLo, tab.szHi);
    int px = nextSize(gx + 2 * sx + 1), py = nextSize(gy + 2 * sy + 1),
        pz = nextSize(gz + 2 * sz + 1);
    auto idx = [&](int i, int j, int k) {
      return static_cast<size_t>(((i % px) + px) % px) +
             static_cast<size_t>(px) * (static_cast<size_t>(((j % py) + py) % py) +
                                        static_cast<size_t>(py) * (((k % pz) + pz) % pz));
    };
    std::vector<Cplx> field(static_cast<size_t>(px) * py * pz, Cplx(0, 0));
    std::vector<Cplx> kern(field.size(), Cplx(0, 0));
    for (Index e = 0; e < cx.h->dim; ++e) {
      auto [d, i, j, k] = cx.edgeAt[static_cast<size_t>(e)];
      if (d == dir) field[idx(i, j, k)] = v(e);
    }
    for (int dk = tab.szLo; dk <= tab.szHi; ++dk)
      for (int dj = tab.syLo; dj <= tab.syHi; ++dj)
        for (int di = tab.sxLo; di <= tab.sxHi; ++di) kern[idx(di, dj, dk)] += tab.at(di, dj, dk);

    auto fft3 = [&](std::vector<Cplx>& a, bool inverse) {
      std::vector<Cplx> line, lineOut;
      // x lines
      line.resize(px);
      lineOut.resize(px);
      for (int k = 0; k < pz; ++k)
        for (int j = 0; j < py; ++j) {
          for (int i = 0; i < px; ++i) line[i] = a[idx(i, j, k)];
          if (inverse)
            fft.inv(lineOut, line);
          else
            fft.fwd(lineOut, line);
          for (int i = 0; i < px; ++i) a[idx(i, j, k)] = lineOut[i];
        }
      line.resize(py);
      lineOut.resize(py);
      for (int k = 0; k < pz; ++k)
        for (int i = 0; i < px; ++i) {
          for (int j = 0; j < py; ++j) line[j] = a[idx(i, j, k)];
          if (inverse)
            fft.inv(lineOut, line);
          else
            fft.fwd(lineOut, line);
          for (int j = 0; j < py; ++j) a[idx(i, j, k)] = lineOut[j];
        }
      line.resize(pz);
      lineOut.resize(pz);
      for (int j = 0; j < py; ++j)
        for (int i = 0; i < px; ++i) {
          for (int k = 0; k < pz; ++k) line[k] = a[idx(i, j, k)];
          if (inverse)
            fft.inv(lineOut, line);
          else
            fft.fwd(lineOut, line);
          for (int k = 0; k < pz; ++k) a[idx(i, j, k)] = lineOut[k];
        }
    };

    fft3(field, false);
    fft3(kern, false);
    for (size_t q = 0; q < field.size(); ++q) field[q] *= kern[q];
    fft3(field, true);

    for (Index e = 0; e < cx.h->dim; ++e) {
      auto [d, i, j, k] = cx.edgeAt[static_cast<size_t>(e)];
      if (d == dir) out(e) += field[idx(i, j, k)].real();
    }
  }
  return out;
}

Coefficient custom_coefficient(ComplexRef cx, SpMat op, const std::string& descr) {
  require(op.rows() == cx->h->dim && op.cols() == cx->h->dim, Err::Structural,
          "custom_coefficient: operator must be square on H");
  Coefficient eps;
  eps.cx = cx;
  eps.kind = CoeffKind::Custom;
  eps.op = std::move(op);
  eps.descr = descr.empty() ? "custom" : descr;
  Mat d = Mat(eps.op);
  eps.symmetric = (d - d.transpose()).cwiseAbs().maxCoeff() <= 1e-14 * (d.cwiseAbs().maxCoeff() + 1e-300);
  return eps;
}

namespace {

Coefficient coefficient_from_json(ComplexRef cx, const nlohmann::json& j);

}  // namespace

Coefficient parse_coefficient(ComplexRef cx, const std::string& spec) {
  std::istringstream in(spec);
  std::string head;
  in >> head;
  require(!head.empty(), Err::Parse, "empty coefficient spec");
  if (head == "identity") return identity_coefficient(cx);
  if (head == "layered") {
    double lo = 0, hi = 0;
    int n = 1, axis = 0;
    in >> lo >> hi;
    require(lo > 0 && hi > 0, Err::Parse, "layered: expected two positive phase values");
    if (!(in >> n)) n = 1;
    if (!(in >> axis)) axis = 0;
    return layered_coefficient(cx, lo, hi, n, axis);
  }
  if (head == "convolution") {
    std::string kname;
    double sigma = 0, ell1 = 0;
    int n = 1;
    in >> kname >> sigma >> ell1 >> n;
    require(kname == "gaussian", Err::Parse, "convolution: only the gaussian kernel is built in");
    require(sigma > 0 && ell1 > 0 && ell1 < 1 && n >= 1, Err::Parse,
            "convolution: expected SIGMA ELL1 N");
    Kernel k = normalize_kernel_ell1(cx, gaussian_kernel(sigma, 1.0), ell1);
    return convolution_coefficient(cx, k, n);
  }
  if (head == "random-coercive") {
    std::uint64_t seed = 1;
    double alpha = 0.3;
    in >> seed;
    if (!(in >> alpha)) alpha = 0.3;
    return random_coercive_coefficient(cx, seed, alpha);
  }
  if (head == "tensor-json" || head == "json") {
    std::string rest;
    std::getline(in, rest);
    size_t p = rest.find_first_not_of(" \t");
    require(p != std::string::npos, Err::Parse, "tensor-json: expected a path or inline json");
    rest = rest.substr(p);
    std::string text = rest;
    if (!rest.empty() && rest[0] != '{') {
      std::ifstream f(rest);
      require(f.good(), Err::Parse, "cannot open coefficient file: " + rest);
      std::stringstream buf;
      buf << f.rdbuf();
      text = buf.str();
    }
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
      fail(Err::Parse, std::string("coefficient json: ") + e.what());
    }
    return coefficient_from_json(cx, j);
  }
  fail(Err::Parse, "unknown coefficient spec: " + head);
}

Coefficient layered_coefficient(ComplexRef cx, double aMinus, double aPlus, int nOsc, int axis) {
  require(aMinus > 0 && aPlus > 0, Err::Coercivity, "layered_coefficient: phases must be positive");
  require(axis >= 0 && axis < 3, Err::Structural, "layered_coefficient: bad axis");
  require(nOsc >= 1, Err::Structural, "layered_coefficient: n must be >= 1");
  const int cells = axis == 0 ? cx->domain.nx : (axis == 1 ? cx->domain.ny : cx->domain.nz);
  // phase fraction of aPlus within cell [i/cells,(i+1)/cells): the medium
  // alternates with period 1/n of the domain length, aMinus first
  auto plusFraction = [&](int i) {
    double lo = static_cast<double>(i) / cells, hi = static_cast<double>(i + 1) / cells;
    double total = 0;
    double half = 1.0 / (2.0 * nOsc);
    long kLo = static_cast<long>(std::floor(lo / half));
    long kHi = static_cast<long>(std::floor(hi / half)) + 1;
    for (long k = kLo; k <= kHi; ++k) {
      double a = std::max(lo, k * half), b = std::min(hi, (k + 1) * half);
      if (b <= a) continue;
      if (k % 2 != 0) total += b - a;  // odd half-period carries aPlus
    }
    return total / (hi - lo);
  };
  std::vector<double> fraction(cells);
  for (int i = 0; i < cells; ++i) fraction[i] = plusFraction(i);

  auto tensor = [=](int i, int j, int k) {
    int c = axis == 0 ? i : (axis == 1 ? j : k);
    double th = fraction[c];
    double harm = 1.0 / ((1.0 - th) / aMinus + th / aPlus);
    double arith = (1.0 - th) * aMinus + th * aPlus;
    Eigen::Vector3d d(arith, arith, arith);
    d(axis) = harm;
    return Eigen::Matrix3d(d.asDiagonal());
  };
  Coefficient eps = multiplication_coefficient(cx, tensor, std::min(aMinus, aPlus));
  eps.n = nOsc;
  eps.descr = "layered(a-=" + std::to_string(aMinus) + ", a+=" + std::to_string(aPlus) +
              ", n=" + std::to_string(nOsc) + ")";
  return eps;
}

Eigen::Matrix3d layered_limit_tensor(double aMinus, double aPlus, int axis) {
  double harm = 2.0 / (1.0 / aMinus + 1.0 / aPlus);
  double arith = 0.5 * (aMinus + aPlus);
  Eigen::Vector3d d(arith, arith, arith);
  d(axis) = harm;
  return Eigen::Matrix3d(d.asDiagonal());
}

Coefficient random_coercive_coefficient(ComplexRef cx, std::uint64_t seed, double alpha) {
  require(alpha > 0, Err::Coercivity, "random_coercive_coefficient: alpha must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int nx = cx->domain.nx, ny = cx->domain.ny, nz = cx->domain.nz;
  std::vector<Eigen::Matrix3d> tensors(static_cast<size_t>(nx) * ny * nz,
                                       Eigen::Matrix3d::Identity());
  for (auto& t : tensors) {
    Eigen::Matrix3d q, s;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) {
        q(r, c) = gauss(rng);
        s(r, c) = gauss(rng);
      }
    Eigen::Matrix3d spd = q.transpose() * q;
    Eigen::Matrix3d skew = 0.5 * (s - s.transpose());
    t = alpha * Eigen::Matrix3d::Identity() + 0.5 * spd + 0.4 * skew;
  }
  auto tensor = [tensors, nx, ny](int i, int j, int k) {
    return tensors[static_cast<size_t>(i) +
                   static_cast<size_t>(nx) * (static_cast<size_t>(j) + static_cast<size_t>(ny) * k)];
  };
  Coefficient eps = multiplication_coefficient(cx, tensor, alpha);
  eps.descr = "random-coercive(seed=" + std::to_string(seed) + ")";
  return eps;
}

namespace {

Coefficient coefficient_from_json(ComplexRef cx, const nlohmann::json& j) {
  try {
    if (j.contains("tensors")) {
      double alpha = j.value("alpha", 0.0);
      require(alpha > 0, Err::Parse, "coefficient json: positive alpha required");
      auto arr = j.at("tensors");
      const int nx = cx->domain.nx, ny = cx->domain.ny, nz = cx->domain.nz;
      require(static_cast<Index>(arr.size()) == static_cast<Index>(nx) * ny * nz, Err::Parse,
              "coefficient json: tensors must cover every voxel (x-fastest)");
      std::vector<Eigen::Matrix3d> tensors(arr.size());
      for (size_t q = 0; q < arr.size(); ++q) {
        require(arr[q].size() == 9, Err::Parse, "coefficient json: tensor needs 9 entries");
        for (int r = 0; r < 3; ++r)
          for (int c = 0; c < 3; ++c) tensors[q](r, c) = arr[q][3 * r + c].get<double>();
      }
      auto tensor = [tensors, nx, ny](int i, int jj, int k) {
        return tensors[static_cast<size_t>(i) +
                       static_cast<size_t>(nx) *
                           (static_cast<size_t>(jj) + static_cast<size_t>(ny) * k)];
      };
      return multiplication_coefficient(cx, tensor, alpha);
    }
    if (j.contains("kernel")) {
      int n = j.value("n", 1);
      auto k = j.at("kernel");
      auto offs = k.at("offsets");
      auto vals = k.at("values");
      require(offs.size() == vals.size(), Err::Parse,
              "coefficient json: offsets/values length mismatch");
      std::unordered_map<long long, double> table;
      for (size_t q = 0; q < offs.size(); ++q) {
        long long oi = offs[q].at(0).get<long long>(), oj = offs[q].at(1).get<long long>(),
                  ok = offs[q].at(2).get<long long>();
        table[(oi + 4096) + 8192 * ((oj + 4096) + 8192 * (ok + 4096))] = vals[q].get<double>();
      }
      double h = cx->domain.h;
      Kernel kern;
      kern.name = "table";
      kern.rho = [table, h](double x, double y, double z) {
        long long oi = std::llround(x / h), oj = std::llround(y / h), ok = std::llround(z / h);
        if (std::abs(x / h - oi) > 1e-9 || std::abs(y / h - oj) > 1e-9 ||
            std::abs(z / h - ok) > 1e-9)
          return 0.0;
        auto it = table.find((oi + 4096) + 8192 * ((oj + 4096) + 8192 * (ok + 4096)));
        return it == table.end() ? 0.0 : it->second;
      };
      return convolution_coefficient(cx, kern, n);
    }
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(Err::Parse, std::string("coefficient json: ") + e.what());
  }
  fail(Err::Parse, "coefficient json: expected 'tensors' or 'kernel'");
}

}  // namespace

AdmissibilityReport admissibility_check(const Coefficient& eps, double condCap) {
  AdmissibilityReport rep;
  const GridComplex& cx = *eps.cx;
  const Index n = cx.h->dim;
  SpMat opT = eps.op.transpose();

  const bool smallDense = n <= 1200;
  OpFactor epsF = eps.diagonal ? OpFactor::fromDiagonal(eps.op.diagonal()) :
                                 OpFactor::fromMatrix(eps.op);

  // (a1)
  if (smallDense) {
    Mat d = Mat(eps.op);
    Eigen::BDCSVD<Mat> svd(d);
    double smin = svd.singularValues()(svd.singularValues().size() - 1);
    rep.cond1 = smin > 0 ? svd.singularValues()(0) / smin : std::numeric_limits<double>::infinity();
  } else {
    double nF = power_norm(n, [&](const Vec& v) { return Vec(eps.op * v); },
                           [&](const Vec& v) { return Vec(opT * v); });
    double nI = epsF.ok() ? power_norm(n, [&](const Vec& v) { return epsF.solve(v); },
                                       [&](const Vec& v) { return epsF.solveT(v); })
                          : std::numeric_limits<double>::infinity();
    rep.cond1 = nF * nI;
  }
  rep.a1 = epsF.ok() && rep.cond1 < condCap;

  // alpha and beta
  if (smallDense) {
    Mat d = Mat(eps.op);
    Eigen::SelfAdjointEigenSolver<Mat> eig(0.5 * (d + d.transpose()));
    rep.alpha = eig.eigenvalues().minCoeff();
    if (epsF.ok()) {
      Mat id = Mat::Identity(n, n);
      Mat inv = epsF.solve(id);
      Eigen::SelfAdjointEigenSolver<Mat> eigI(0.5 * (inv + inv.transpose()));
      double m = eigI.eigenvalues().minCoeff();
      rep.beta = m > 0 ? 1.0 / m : std::numeric_limits<double>::infinity();
    }
  } else {
    rep.alpha = sym_min_eig(n, [&](const Vec& v) { return Vec(0.5 * (eps.op * v + opT * v)); });
    if (epsF.ok()) {
      double m =
          sym_min_eig(n, [&](const Vec& v) { return Vec(0.5 * (epsF.solve(v) + epsF.solveT(v))); });
      rep.beta = m > 0 ? 1.0 / m : std::numeric_limits<double>::infinity();
    }
  }

  // (a2): compression of eps to ran(g), parametrized through the potentials
  SpMat gT = cx.g.transpose();
  SpMat nMat = SpMat(gT * eps.op) * cx.g;
  OpFactor nF = OpFactor::fromMatrix(nMat);
  if (nF.ok()) {
    auto pi0 = [&](const Vec& v) -> Vec { return cx.projectGradRange(v); };
    double tn = power_norm(
        n, [&](const Vec& v) -> Vec { return pi0(Vec(eps.op * pi0(v))); },
        [&](const Vec& v) -> Vec { return pi0(Vec(opT * pi0(v))); });
    double tni = power_norm(
        n, [&](const Vec& v) -> Vec { return Vec(cx.g * nF.solve(Vec(gT * v))); },
        [&](const Vec& v) -> Vec { return Vec(cx.g * nF.solveT(Vec(gT * v))); });
    rep.cond2 = tn * tni;
    rep.a2 = rep.cond2 < condCap;
  } else {
    rep.cond2 = std::numeric_limits<double>::infinity();
    rep.a2 = false;
  }

  // (a3): compression of eps^{-1} to ran(c^T); its inverse is evaluated via
  // the bordered potential system on [g | harmonic]
  if (epsF.ok()) {
    const Mat& hb = cx.harmonic();
    const Index nk = hb.cols();
    const Index n0 = cx.x0->dim;
    Mat epsHb(n, nk);
    for (Index q = 0; q < nk; ++q) epsHb.col(q) = eps.op * hb.col(q);
    std::vector<Triplet> trip;
    SpMat core = nMat;
    for (Index k = 0; k < core.outerSize(); ++k)
      for (SpMat::InnerIterator it(core, k); it; ++it)
        trip.emplace_back(it.row(), it.col(), it.value());
    Mat gTepsHb = gT * epsHb;
    Mat epsThb(n, nk);
    for (Index q = 0; q < nk; ++q) epsThb.col(q) = opT * hb.col(q);
    Mat hbTepsG = (SpMat(gT) * epsThb).transpose();  // hb^T eps g
    Mat hbTepsHb = hb.transpose() * epsHb;
    for (Index r = 0; r < n0; ++r)
      for (Index q = 0; q < nk; ++q) {
        if (gTepsHb(r, q) != 0) trip.emplace_back(r, n0 + q, gTepsHb(r, q));
        if (hbTepsG(q, r) != 0) trip.emplace_back(n0 + q, r, hbTepsG(q, r));
      }
    for (Index q = 0; q < nk; ++q)
      for (Index p = 0; p < nk; ++p)
        if (hbTepsHb(q, p) != 0) trip.emplace_back(n0 + q, n0 + p, hbTepsHb(q, p));
    SpMat bord(n0 + nk, n0 + nk);
    bord.setFromTriplets(trip.begin(), trip.end());
    OpFactor bordF = OpFactor::fromMatrix(bord);

    auto piC = [&](const Vec& v) { return cx.projectCurlRange(v); };
    if (bordF.ok()) {
      auto applyPot = [&](const Vec& mt) {
        Vec out = cx.g * mt.head(n0);
        if (nk) out += hb * mt.tail(nk);
        return out;
      };
      auto potT = [&](const Vec& v) {
        Vec out(n0 + nk);
        out.head(n0) = gT * v;
        if (nk) out.tail(nk) = hb.transpose() * v;
        return out;
      };
      auto t3inv = [&](const Vec& v) -> Vec {
        Vec w = piC(v);
        Vec ew = eps.op * w;
        Vec mt = bordF.solve(potT(ew));
        return Vec(eps.op * (w - applyPot(mt)));
      };
      auto t3invT = [&](const Vec& v) -> Vec {
        Vec w = opT * piC(v);
        Vec mt = bordF.solveT(potT(w));
        return piC(Vec(w - opT * applyPot(mt)));
      };
      double t3n = power_norm(
          n, [&](const Vec& v) -> Vec { return piC(epsF.solve(piC(v))); },
          [&](const Vec& v) -> Vec { return piC(epsF.solveT(piC(v))); });
      double t3i = power_norm(n, t3inv, t3invT);
      rep.cond3 = t3n * t3i;
      rep.a3 = rep.cond3 < condCap;
    } else {
      rep.cond3 = std::numeric_limits<double>::infinity();
      rep.a3 = false;
    }
  } else {
    rep.cond3 = std::numeric_limits<double>::infinity();
    rep.a3 = false;
  }
  return rep;
}

}  // namespace nlhc
