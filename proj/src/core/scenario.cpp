#include "scenario.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <mutex>
#include <thread>

namespace nlhc {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void parallel_for(int count, int workers, const std::function<void(int)>& fn) {
  workers = std::max(1, std::min(workers, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr firstError;
  std::mutex errMu;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (;;) {
        int i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(errMu);
          if (!firstError) firstError = std::current_exception();
          return;
        }
      }
    });
  for (auto& t : pool) t.join();
  if (firstError) std::rethrow_exception(firstError);
}

int workers_from_env(int configured) {
  if (configured > 0) return configured;
  const char* env = std::getenv("NLHC_WORKERS");
  if (!env) return 1;
  int w = std::atoi(env);
  return w >= 1 ? w : 1;
}

}  // namespace

// deterministic smooth fields: few low Fourier modes with seeded coefficients
Vec scenario_node_data(const GridComplex& cx, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  const auto& d = cx.domain;
  Vec f = Vec::Zero(cx.x0->dim);
  for (int mode = 0; mode < 3; ++mode) {
    double cmx = coef(rng), cmy = coef(rng), cmz = coef(rng), amp = coef(rng);
    int qx = 1 + mode % 2, qy = 1 + (mode + 1) % 2, qz = 1;
    for (Index i = 0; i < cx.x0->dim; ++i) {
      auto [ni, nj, nk] = cx.nodeAt[static_cast<size_t>(i)];
      double x = double(ni) / d.nx, y = double(nj) / d.ny, z = double(nk) / d.nz;
      f(i) += amp * std::sin(M_PI * qx * x + 0.3 * cmx) * std::sin(M_PI * qy * y + 0.3 * cmy) *
              std::sin(M_PI * qz * z + 0.3 * cmz);
    }
  }
  return f;
}

Vec scenario_edge_field(const GridComplex& cx, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  const auto& d = cx.domain;
  Vec w = Vec::Zero(cx.h->dim);
  double c1 = coef(rng), c2 = coef(rng), c3 = coef(rng);
  for (Index e = 0; e < cx.h->dim; ++e) {
    auto [dir, i, j, k] = cx.edgeAt[static_cast<size_t>(e)];
    double x = (i + (dir == 0 ? 0.5 : 0.0)) / d.nx;
    double y = (j + (dir == 1 ? 0.5 : 0.0)) / d.ny;
    double z = (k + (dir == 2 ? 0.5 : 0.0)) / d.nz;
    double base = std::sin(M_PI * x + c1) * std::cos(M_PI * y + c2) * std::sin(M_PI * z + c3);
    w(e) = base * (dir == 0 ? 1.0 : dir == 1 ? 0.7 : -0.4);
  }
  return w;
}

namespace {

struct Family {
  std::function<Coefficient(int)> at;
  Coefficient limit;
  std::string name;
};

Family make_family(ComplexRef cx, const std::string& spec) {
  std::istringstream in(spec);
  std::string head;
  in >> head;
  Family fam;
  fam.name = spec;
  if (head == "layered") {
    double lo = 1, hi = 4;
    int axis = 0;
    in >> lo >> hi;
    if (!(in >> axis)) axis = 0;
    require(lo > 0 && hi > 0, Err::Parse, "family layered: positive phases required");
    fam.at = [cx, lo, hi, axis](int n) { return layered_coefficient(cx, lo, hi, n, axis); };
    fam.limit = constant_tensor_coefficient(cx, layered_limit_tensor(lo, hi, axis),
                                            std::min(lo, hi));
    fam.limit.descr = "layered-limit";
    return fam;
  }
  if (head == "convolution") {
    double sigma = 0.2, ell1 = 0.5;
    in >> sigma >> ell1;
    require(sigma > 0 && ell1 > 0 && ell1 < 1, Err::Parse,
            "family convolution: expected SIGMA ELL1");
    Kernel k = normalize_kernel_ell1(cx, gaussian_kernel(sigma, 1.0), ell1);
    fam.at = [cx, k](int n) { return convolution_coefficient(cx, k, n); };
    fam.limit = identity_coefficient(cx);
    return fam;
  }
  if (head == "constant") {
    double c = 1.0;
    in >> c;
    require(c > 0, Err::Parse, "family constant: positive value required");
    Coefficient eps = constant_tensor_coefficient(cx, c * Eigen::Matrix3d::Identity(), c);
    eps.descr = "constant";
    fam.at = [eps](int) { return eps; };
    fam.limit = eps;
    return fam;
  }
  fail(Err::Parse, "unknown coefficient family: " + spec);
}

bool non_increasing_tail(const std::vector<double>& v, size_t count) {
  if (v.size() < count) return false;
  for (size_t q = v.size() - count; q + 1 < v.size(); ++q)
    if (v[q] < v[q + 1] - 1e-14 * std::max(1.0, std::abs(v[q]))) return false;
  return true;
}

}  // namespace

ScenarioConfig parse_scenario_config(const std::string& text) {
  ScenarioConfig cfg;
  std::istringstream in(text);
  std::string line;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    size_t eq = line.find('=');
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    require(eq != std::string::npos, Err::Parse,
            "scenario config line " + std::to_string(lineNo) + ": expected key = value");
    auto trim = [](std::string s) {
      size_t a = s.find_first_not_of(" \t\r");
      size_t b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
    if (key == "kind")
      cfg.kind = val;
    else if (key == "domain")
      cfg.domainSpec = val;
    else if (key == "family" || key == "coefficient")
      cfg.family = val;
    else if (key == "indices") {
      cfg.indices.clear();
      std::istringstream vs(val);
      int n;
      while (vs >> n) cfg.indices.push_back(n);
      require(!cfg.indices.empty(), Err::Parse, "scenario config: empty index list");
      for (size_t q = 0; q + 1 < cfg.indices.size(); ++q)
        require(cfg.indices[q] < cfg.indices[q + 1], Err::Parse,
                "scenario config: indices must be strictly increasing");
    } else if (key == "seed")
      cfg.seed = std::strtoull(val.c_str(), nullptr, 10);
    else if (key == "test_modes")
      cfg.testModes = std::atoi(val.c_str());
    else if (key == "test_randoms")
      cfg.testRandoms = std::atoi(val.c_str());
    else if (key == "output")
      cfg.output = val;
    else if (key == "energy_tol")
      cfg.energyTol = std::atof(val.c_str());
    else if (key == "weak_tol")
      cfg.weakTol = std::atof(val.c_str());
    else if (key == "hypothesis_cap")
      cfg.hypothesisCap = std::atof(val.c_str());
    else if (key == "block_dim")
      cfg.blockDim = std::atoi(val.c_str());
    else if (key == "workers")
      cfg.workers = std::atoi(val.c_str());
    else
      fail(Err::Parse, "scenario config: unknown key '" + key + "'");
  }
  return cfg;
}

ScenarioConfig read_scenario_config(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), Err::Parse, "cannot open scenario config: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario_config(buf.str());
}

std::string Report::csv() const {
  std::ostringstream out;
  for (size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
  out << "\n";
  for (const auto& row : rows) {
    for (size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << fmt(row[c]);
    out << "\n";
  }
  for (const auto& line : footer) out << "# " << line << "\n";
  return out.str();
}

void Report::writeCsv(const std::string& path) const {
  if (path.empty()) {
    std::cout << csv();
    return;
  }
  std::ofstream out(path, std::ios::binary);
  require(out.good(), Err::Parse, "cannot open output file: " + path);
  out << csv();
}

double Report::cell(size_t row, const std::string& column) const {
  for (size_t c = 0; c < columns.size(); ++c)
    if (columns[c] == column) {
      require(row < rows.size() && c < rows[row].size(), Err::Internal, "Report::cell bounds");
      return rows[row][c];
    }
  fail(Err::Internal, "Report::cell: no column " + column);
}

namespace {

struct HomogenisationState {
  ComplexRef cx;
  TestFamily family;
  Vec f, g, x;
  Family fam;
  std::shared_ptr<SolverContext> limitCtx;
  SolveResult limitSolve;
  double limitEnergy = 0;
  Vec limitFlux;
  std::shared_ptr<GridSplit> split1, split2;
};

HomogenisationState prepare(const ScenarioConfig& cfg, bool needSplits) {
  HomogenisationState st;
  st.cx = build_complex_ref(parse_domain(cfg.domainSpec));
  st.family = default_test_family(st.cx->h, cfg.testModes, cfg.testRandoms, cfg.seed);
  st.f = scenario_node_data(*st.cx, cfg.seed + 1);
  Vec w = scenario_edge_field(*st.cx, cfg.seed + 2);
  st.g = st.cx->c * w;
  st.x = Vec::Zero(st.cx->h->dim);
  if (st.cx->harmonicDim() > 0) st.x = st.cx->harmonic().col(0);
  st.fam = make_family(st.cx, cfg.family);
  st.limitCtx = std::make_shared<SolverContext>(st.cx, std::make_shared<Coefficient>(st.fam.limit));
  ElectrostaticData data{st.f, st.g, st.x, Formulation::PiDNormalized};
  st.limitSolve = solve_electrostatics(*st.limitCtx, data);
  st.limitFlux = st.fam.limit.op * st.limitSolve.field;
  st.limitEnergy = inner(st.cx->h, st.limitFlux, st.limitSolve.field);
  if (needSplits) {
    st.split1 = std::make_shared<GridSplit>(st.cx, GridSplit::Kind::GradKerDiv);
    st.split2 = std::make_shared<GridSplit>(st.cx, GridSplit::Kind::CurlPerpCurl);
  }
  return st;
}

}  // namespace

Report run_homogenisation(const ScenarioConfig& cfg) {
  HomogenisationState st = prepare(cfg, true);
  const int count = static_cast<int>(cfg.indices.size());
  Report rep;
  rep.columns = {"n",          "d_schur",       "energy",  "energy_gap", "e_weak_max",
                 "flux_weak_max", "res_div",    "res_curl", "res_harm"};
  rep.rows.assign(count, std::vector<double>(rep.columns.size(), 0.0));
  std::vector<double> dSchur2(count, 0.0);

  const double eNorm = norm(st.cx->h, st.limitSolve.field);
  const double fluxNorm = norm(st.cx->h, st.limitFlux);

  parallel_for(count, workers_from_env(cfg.workers), [&](int q) {
    int n = cfg.indices[static_cast<size_t>(q)];
    auto eps = std::make_shared<Coefficient>(st.fam.at(n));
    SolverContext ctx(st.cx, eps);
    ElectrostaticData data{st.f, st.g, st.x, Formulation::PiDNormalized};
    SolveResult sol = solve_electrostatics(ctx, data);
    Vec flux = eps->op * sol.field;
    double energy = inner(st.cx->h, flux, sol.field);
    Vec dE = sol.field - st.limitSolve.field;
    Vec dFlux = flux - st.limitFlux;
    double eWeak = 0, fWeak = 0;
    for (Index j = 0; j < st.family.vectors.cols(); ++j) {
      eWeak = std::max(eWeak, std::abs(inner(st.cx->h, st.family.vectors.col(j), dE)));
      fWeak = std::max(fWeak, std::abs(inner(st.cx->h, st.family.vectors.col(j), dFlux)));
    }
    auto& row = rep.rows[static_cast<size_t>(q)];
    row[0] = n;
    row[1] = grid_schur_distance(*st.split1, *eps, st.fam.limit, st.family);
    row[2] = energy;
    row[3] = std::abs(energy - st.limitEnergy);
    row[4] = eWeak / std::max(eNorm, 1e-300);
    row[5] = fWeak / std::max(fluxNorm, 1e-300);
    row[6] = sol.resDiv;
    row[7] = sol.resCurl;
    row[8] = sol.resHarm;
    dSchur2[static_cast<size_t>(q)] = grid_schur_distance(*st.split2, *eps, st.fam.limit, st.family);
  });

  auto col = [&](size_t c) {
    std::vector<double> v(rep.rows.size());
    for (size_t r = 0; r < rep.rows.size(); ++r) v[r] = rep.rows[r][c];
    return v;
  };
  const size_t tail = std::min<size_t>(3, rep.rows.size());
  bool trendEnergy = non_increasing_tail(col(3), tail);
  bool trendEw = non_increasing_tail(col(4), tail);
  bool trendFw = non_increasing_tail(col(5), tail);
  bool trendSchur1 = non_increasing_tail(col(1), tail);
  bool trendSchur2 = non_increasing_tail(dSchur2, tail);
  double relEnergyGap = rep.rows.back()[3] / std::max(std::abs(st.limitEnergy), 1e-300);
  bool finalOk = relEnergyGap <= cfg.energyTol;
  bool finalFluxOk = rep.rows.back()[5] <= cfg.weakTol;
  bool pass1 = trendEnergy && trendEw && trendFw && trendSchur1 && finalOk && finalFluxOk;
  bool pass2 = trendEnergy && trendEw && trendFw && trendSchur2 && finalOk && finalFluxOk;
  rep.pass = pass1;

  rep.footer.push_back("scenario = homogenise");
  rep.footer.push_back("family = " + st.fam.name);
  rep.footer.push_back("domain = " + cfg.domainSpec);
  rep.footer.push_back("limit_energy = " + fmt(st.limitEnergy));
  rep.footer.push_back("final_relative_energy_gap = " + fmt(relEnergyGap));
  rep.footer.push_back(std::string("trend_energy_gap = ") + (trendEnergy ? "non-increasing" : "violated"));
  rep.footer.push_back(std::string("trend_e_weak = ") + (trendEw ? "non-increasing" : "violated"));
  rep.footer.push_back(std::string("trend_flux_weak = ") + (trendFw ? "non-increasing" : "violated"));
  rep.footer.push_back(std::string("trend_d_schur = ") + (trendSchur1 ? "non-increasing" : "violated"));
  for (int q = 0; q < count; ++q)
    rep.footer.push_back("d_schur_split2[n=" + std::to_string(cfg.indices[static_cast<size_t>(q)]) +
                         "] = " + fmt(dSchur2[static_cast<size_t>(q)]));
  rep.footer.push_back(std::string("verdict_split2 = ") + (pass2 ? "PASS" : "FAIL"));
  rep.footer.push_back(std::string("verdict = ") + (rep.pass ? "PASS" : "FAIL"));
  rep.footer.push_back("tolerances: energy_tol = " + fmt(cfg.energyTol) +
                       ", weak_tol = " + fmt(cfg.weakTol) + " (artifact-chosen; the source results carry no rates)");
  return rep;
}

Report run_divcurl(const ScenarioConfig& cfg) {
  Report rep;
  rep.columns = {"n", "pairing", "pairing_gap", "hminus_div_dev", "curl_dev"};

  if (cfg.family.rfind("adversarial", 0) == 0) {
    // oscillating pair with growing discrete div norms: hypothesis violated
    ComplexRef cx = build_complex_ref(parse_domain(cfg.domainSpec));
    std::vector<double> hdiv(cfg.indices.size());
    Vec base = scenario_edge_field(*cx, cfg.seed + 2);
    for (size_t q = 0; q < cfg.indices.size(); ++q) {
      int n = cfg.indices[q];
      Vec osc(cx->h->dim);
      for (Index e = 0; e < cx->h->dim; ++e) {
        auto [dir, i, j, k] = cx->edgeAt[static_cast<size_t>(e)];
        double x = (i + (dir == 0 ? 0.5 : 0.0)) / cx->domain.nx;
        osc(e) = std::sin(M_PI * (2 * n + 1) * x) * (dir == 0 ? 1.0 : 0.2);
      }
      osc /= norm(cx->h, osc);
      double pairing = inner(cx->h, osc, osc);
      Vec divr = cx->g.transpose() * osc;
      hdiv[q] = hminus_norm(*cx, divr);
      rep.rows.push_back({double(n), pairing, 0.0, hdiv[q], 0.0});
    }
    double spread = *std::max_element(hdiv.begin(), hdiv.end()) -
                    *std::min_element(hdiv.begin(), hdiv.end());
    for (auto& row : rep.rows) row[2] = std::abs(row[1] - rep.rows.back()[1]);
    rep.pass = false;
    rep.footer.push_back("scenario = divcurl");
    rep.footer.push_back("hminus_div_spread = " + fmt(spread));
    rep.footer.push_back(spread > cfg.hypothesisCap
                             ? "verdict = NOT-APPLICABLE (compactness hypothesis violated)"
                             : "verdict = FAIL");
    return rep;
  }

  HomogenisationState st = prepare(cfg, false);
  Vec divLimit = st.cx->g.transpose() * st.limitFlux;
  double curlScale = norm(st.cx->x1, st.g);
  for (size_t q = 0; q < cfg.indices.size(); ++q) {
    int n = cfg.indices[q];
    auto eps = std::make_shared<Coefficient>(st.fam.at(n));
    SolverContext ctx(st.cx, eps);
    ElectrostaticData data{st.f, st.g, st.x, Formulation::PiDNormalized};
    SolveResult sol = solve_electrostatics(ctx, data);
    Vec flux = eps->op * sol.field;  // r_n
    double pairing = inner(st.cx->h, flux, sol.field);
    Vec divDev = Vec(st.cx->g.transpose() * flux) - divLimit;
    double hdiv = hminus_norm(*st.cx, divDev);
    double cdev = norm(st.cx->x1, Vec(st.cx->c * sol.field - st.g)) /
                  std::max(curlScale, 1e-300);
    rep.rows.push_back({double(n), pairing, std::abs(pairing - st.limitEnergy), hdiv, cdev});
  }
  std::vector<double> gaps, hdivs;
  for (auto& r : rep.rows) {
    gaps.push_back(r[2]);
    hdivs.push_back(r[3]);
  }
  double spread = *std::max_element(hdivs.begin(), hdivs.end()) -
                  *std::min_element(hdivs.begin(), hdivs.end());
  bool hypothesisOk = spread <= cfg.hypothesisCap;
  double relFinal = gaps.back() / std::max(std::abs(st.limitEnergy), 1e-300);
  bool trend = non_increasing_tail(gaps, std::min<size_t>(3, gaps.size()));
  rep.pass = hypothesisOk && trend && relFinal <= cfg.energyTol;
  rep.footer.push_back("scenario = divcurl");
  rep.footer.push_back("limit_pairing = " + fmt(st.limitEnergy));
  rep.footer.push_back("final_relative_gap = " + fmt(relFinal));
  rep.footer.push_back("hminus_div_spread = " + fmt(spread));
  rep.footer.push_back(!hypothesisOk ? "verdict = NOT-APPLICABLE (compactness hypothesis violated)"
                                     : (rep.pass ? "verdict = PASS" : "verdict = FAIL"));
  return rep;
}

Report run_compactness(const ScenarioConfig& cfg) {
  HomogenisationState st = prepare(cfg, false);
  Report rep;
  rep.columns = {"n", "err_l2", "sandwich_lhs", "sandwich_rhs", "sandwich_slack"};
  rep.rows.assign(cfg.indices.size(), std::vector<double>(rep.columns.size(), 0.0));
  std::vector<int> sandwichOk(cfg.indices.size(), 0);
  parallel_for(static_cast<int>(cfg.indices.size()), workers_from_env(cfg.workers), [&](int q) {
    int n = cfg.indices[static_cast<size_t>(q)];
    auto eps = std::make_shared<Coefficient>(st.fam.at(n));
    SolverContext ctx(st.cx, eps);
    ElectrostaticData data{st.f, st.g, st.x, Formulation::PiDNormalized};
    SolveResult sol = solve_electrostatics(ctx, data);
    Vec diff = sol.field - st.limitSolve.field;
    double err = norm(st.cx->h, diff);
    double c = eps->alphaBound;
    double lhs = c * err * err;
    double rhs = inner(st.cx->h, diff, Vec(eps->op * diff));
    auto& row = rep.rows[static_cast<size_t>(q)];
    row[0] = n;
    row[1] = err;
    row[2] = lhs;
    row[3] = rhs;
    row[4] = rhs - lhs;
    sandwichOk[static_cast<size_t>(q)] = row[4] >= -1e-10 * std::max(1.0, std::abs(rhs));
  });
  std::vector<double> errs;
  for (auto& r : rep.rows) errs.push_back(r[1]);
  bool sandwichAll = std::all_of(sandwichOk.begin(), sandwichOk.end(), [](int v) { return v; });
  bool trend = non_increasing_tail(errs, std::min<size_t>(3, errs.size()));
  rep.pass = sandwichAll && trend;
  rep.footer.push_back("scenario = compactness");
  rep.footer.push_back("family = " + st.fam.name);
  rep.footer.push_back(std::string("sandwich_inequality = ") + (sandwichAll ? "holds" : "violated"));
  rep.footer.push_back(std::string("trend_err_l2 = ") + (trend ? "non-increasing" : "violated"));
  rep.footer.push_back(std::string("verdict = ") + (rep.pass ? "PASS" : "FAIL"));
  return rep;
}

Report run_incomparable(const ScenarioConfig& cfg) {
  ComplexRef cx = build_complex_ref(parse_domain(cfg.domainSpec));
  const Index nH = cx->h->dim;
  const Index blockDim = cfg.blockDim;
  require(cx->harmonicDim() >= 1, Err::Structural,
          "incomparable demo needs a domain with harmonic fields");
  require(blockDim >= 8 && blockDim % 4 == 0, Err::Structural,
          "incomparable: block_dim must be a positive multiple of 4");

  // L0 = ran(g); L1 = H_D extended inside ran(c^T); L2 = the rest
  Subspace l0 = span_subspace(cx->h, Mat(cx->g), 1e-9);
  Mat l1raw(nH, blockDim);
  const Mat& hb = cx->harmonic();
  require(blockDim >= hb.cols() + 1, Err::Structural, "incomparable: block_dim too small");
  l1raw.leftCols(hb.cols()) = hb;
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (Index q = hb.cols(); q < blockDim; ++q) {
    Vec r(cx->x1->dim);
    for (Index i = 0; i < r.size(); ++i) r(i) = gauss(rng);
    l1raw.col(q) = cx->c.transpose() * r;  // orthogonal to ran(g) and to H_D
  }
  Subspace l1 = span_subspace(cx->h, l1raw, 1e-9);
  require(l1.dim() == blockDim, Err::Structural, "incomparable: extension block is degenerate");
  Mat l01(nH, l0.dim() + l1.dim());
  l01 << l0.basis, l1.basis;
  Subspace l2 = complement(Subspace{cx->h, l01});

  auto concat = [&](const Subspace& a, const Subspace& b) {
    Mat m(nH, a.dim() + b.dim());
    m << a.basis, b.basis;
    return Subspace{cx->h, m};
  };
  auto sp0 = std::make_shared<const BlockSplit>(make_split(l0, concat(l1, l2)));
  auto sp1 = std::make_shared<const BlockSplit>(make_split(concat(l0, l1), l2));

  // c_n = id + B1 (diag(vals) - id) B1^T M differs from the identity only on
  // L1, so its compression onto a split needs just the small factors
  // Cj = Bj^T M B1.
  auto crossFactor = [&](const Subspace& sub) {
    return Mat(sub.basis.transpose() * cx->h->mass.asDiagonal() * l1.basis);
  };
  Mat c0s0 = crossFactor(sp0->h0), c1s0 = crossFactor(sp0->h1);
  Mat c0s1 = crossFactor(sp1->h0), c1s1 = crossFactor(sp1->h1);
  auto blockOperatorFor = [&](const std::shared_ptr<const BlockSplit>& sp, const Mat& cr0,
                              const Mat& cr1, const Vec& vals) {
    Vec delta = vals.array() - 1.0;
    Mat a00 = Mat::Identity(sp->h0.dim(), sp->h0.dim()) +
              cr0 * delta.asDiagonal() * cr0.transpose();
    Mat a01 = cr0 * delta.asDiagonal() * cr1.transpose();
    Mat a10 = cr1 * delta.asDiagonal() * cr0.transpose();
    Mat a11 = Mat::Identity(sp->h1.dim(), sp->h1.dim()) +
              cr1 * delta.asDiagonal() * cr1.transpose();
    return block_operator_from_parts(sp, std::move(a00), std::move(a01), std::move(a10),
                                     std::move(a11));
  };

  // quarter-indicator test vectors inside L1, then one L0 and one L2 vector
  Mat tvecs(nH, 6);
  const Index quarter = blockDim / 4;
  for (int qv = 0; qv < 4; ++qv) {
    Vec coords = Vec::Zero(blockDim);
    for (Index i = qv * quarter; i < (qv + 1) * quarter; ++i) coords(i) = 1.0;
    tvecs.col(qv) = l1.basis * (coords / std::sqrt(double(quarter)));
  }
  tvecs.col(4) = l0.basis.col(0);
  tvecs.col(5) = l2.basis.col(0);
  TestFamily family = make_test_family(cx->h, tvecs);

  auto patternValues = [&](int n) {
    // even n: values {0.5, 1.5} at oscillation k = n/2; odd n: {0.25, 1.75}
    // at k = (n+1)/2  (two interleaved families with equal means)
    bool even = n % 2 == 0;
    int k = even ? n / 2 : (n + 1) / 2;
    double lo = even ? 0.5 : 0.25, hi = even ? 1.5 : 1.75;
    Vec vals(blockDim);
    for (Index i = 0; i < blockDim; ++i) {
      double phase = std::fmod((double(i) + 0.5) * k / double(blockDim), 1.0);
      vals(i) = phase < 0.5 ? lo : hi;
    }
    return vals;
  };

  BlockOperator id0 = blockOperatorFor(sp0, c0s0, c1s0, Vec::Ones(blockDim));
  BlockOperator id1 = blockOperatorFor(sp1, c0s1, c1s1, Vec::Ones(blockDim));

  Report rep;
  rep.columns = {"n", "d_tau0", "d_tau1", "d_tau0_inv", "d_tau1_inv"};
  double machineryDefect = 0.0;
  for (size_t q = 0; q < cfg.indices.size(); ++q) {
    int n = cfg.indices[q];
    Vec vals = patternValues(n);
    BlockOperator a0 = blockOperatorFor(sp0, c0s0, c1s0, vals);
    BlockOperator a1 = blockOperatorFor(sp1, c0s1, c1s1, vals);
    double d0 = schur_distance(a0, id0, family);
    double d1 = schur_distance(a1, id1, family);
    Vec inv = vals.cwiseInverse();
    BlockOperator b0 = blockOperatorFor(sp0, c0s0, c1s0, inv);
    BlockOperator b1 = blockOperatorFor(sp1, c0s1, c1s1, inv);
    double d0i = schur_distance(b0, id0, family);
    double d1i = schur_distance(b1, id1, family);
    if (q + 2 >= cfg.indices.size()) {
      // route the inverse through block_inverse on the last two indices to
      // tie the demo to the general machinery
      LinearMap invMap = block_inverse(a0);
      BlockOperator b1via = block_operator(sp1, invMap);
      machineryDefect = std::max(machineryDefect,
                                 std::abs(schur_distance(b1via, id1, family) - d1i));
    }
    rep.rows.push_back({double(n), d0, d1, d0i, d1i});
  }

  // verdicts: tau0 converges along the whole sequence, tau1 clusters by parity
  double finalTau0 = 0, finalTau1Inv = 0;
  double lastEvenTau1 = -1, lastOddTau1 = -1, lastEvenTau0i = -1, lastOddTau0i = -1;
  for (auto& r : rep.rows) {
    int n = static_cast<int>(r[0]);
    finalTau0 = r[1];
    finalTau1Inv = r[4];
    if (n % 2 == 0) {
      lastEvenTau1 = r[2];
      lastEvenTau0i = r[3];
    } else {
      lastOddTau1 = r[2];
      lastOddTau0i = r[3];
    }
  }
  double clusterGapTau1 = std::abs(lastEvenTau1 - lastOddTau1);
  double clusterGapTau0i = std::abs(lastEvenTau0i - lastOddTau0i);
  bool pass = finalTau0 <= 1e-3 && clusterGapTau1 >= 0.1 && finalTau1Inv <= 1e-3 &&
              clusterGapTau0i >= 0.1 && machineryDefect <= 1e-9;
  rep.pass = pass;
  rep.footer.push_back("scenario = incomparable");
  rep.footer.push_back("final_d_tau0 = " + fmt(finalTau0));
  rep.footer.push_back("cluster_gap_d_tau1 = " + fmt(clusterGapTau1));
  rep.footer.push_back("final_d_tau1_inv = " + fmt(finalTau1Inv));
  rep.footer.push_back("cluster_gap_d_tau0_inv = " + fmt(clusterGapTau0i));
  rep.footer.push_back("block_inverse_route_defect = " + fmt(machineryDefect));
  rep.footer.push_back(std::string("verdict = ") + (pass ? "PASS" : "FAIL"));
  return rep;
}

Report run_scenario(const ScenarioConfig& cfg) {
  if (cfg.kind == "homogenise") return run_homogenisation(cfg);
  if (cfg.kind == "divcurl") return run_divcurl(cfg);
  if (cfg.kind == "compactness") return run_compactness(cfg);
  if (cfg.kind == "incomparable") return run_incomparable(cfg);
  fail(Err::Parse, "unknown scenario kind: " + cfg.kind);
}

Report schur_identity_suite(std::uint64_t seed, int instances) {
  Report rep;
  rep.columns = {"instance", "identity", "residual"};
  // identity codes: 0 factorization, 1 inverse-product, 2..5 duality,
  // 6..9 three-block expansion
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dimDist(8, 40);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int inst = 0; inst < instances; ++inst) {
    int n = dimDist(rng);
    Mat q(n, n), s(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) {
        q(r, c) = gauss(rng);
        s(r, c) = gauss(rng);
      }
    Mat a = Mat::Identity(n, n) + 0.5 / n * (q.transpose() * q) + 0.4 * (s - s.transpose());
    SpaceRef space = make_space(n);
    std::uniform_int_distribution<int> splitDist(1, n - 1);
    int n0 = splitDist(rng);
    Mat raw(n, n);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < n; ++c) raw(r, c) = gauss(rng);
    Subspace all = span_subspace(space, raw, 1e-9);
    auto split = std::make_shared<const BlockSplit>(
        make_split(Subspace{space, all.basis.leftCols(n0)},
                   Subspace{space, all.basis.rightCols(n - n0)}));
    BlockOperator blk = block_operator(split, a);
    SchurData sd = schur_data(blk);
    rep.rows.push_back({double(inst), 0.0, schur_factorization_residual(blk, sd)});
    Mat inv = block_inverse_matrix(blk);
    Mat full(n, n);
    full << blk.a00, blk.a01, blk.a10, blk.a11;
    rep.rows.push_back(
        {double(inst), 1.0, (inv * full - Mat::Identity(n, n)).norm() / std::sqrt(double(n))});
    DualityReport dr = inversion_duality(blk);
    rep.rows.push_back({double(inst), 2.0, dr.resSchur});
    rep.rows.push_back({double(inst), 3.0, dr.resM10});
    rep.rows.push_back({double(inst), 4.0, dr.resM01});
    rep.rows.push_back({double(inst), 5.0, dr.resInv00});
    if (n >= 12) {
      int d1 = 1 + inst % 5;
      int d0 = (n - d1) / 2, d2 = n - d0 - d1;
      ThreeBlockReport tb = three_block_expansion(
          a, Subspace{space, all.basis.leftCols(d0)},
          Subspace{space, all.basis.middleCols(d0, d1)},
          Subspace{space, all.basis.rightCols(d2)});
      rep.rows.push_back({double(inst), 6.0, tb.resInv});
      rep.rows.push_back({double(inst), 7.0, tb.resM10});
      rep.rows.push_back({double(inst), 8.0, tb.resM01});
      rep.rows.push_back({double(inst), 9.0, tb.resSchur});
    }
  }
  double worst = 0;
  for (auto& r : rep.rows) worst = std::max(worst, r[2]);
  rep.pass = worst <= 1e-9;
  rep.footer.push_back("identity codes: 0 schur-factorization, 1 inverse-product, 2 duality-schur, "
                       "3 duality-m10, 4 duality-m01, 5 duality-inv00, 6 threeblock-inv, "
                       "7 threeblock-m10, 8 threeblock-m01, 9 threeblock-schur");
  rep.footer.push_back("worst_residual = " + fmt(worst));
  rep.footer.push_back(std::string("verdict = ") + (rep.pass ? "PASS" : "FAIL"));
  return rep;
}

}  // namespace nlhc
