#pragma once

#include "schur_grid.hpp"
#include "solve.hpp"

namespace nlhc {

// Key-value scenario description (one `key = value` per line, # comments).
struct ScenarioConfig {
  std::string kind;        // homogenise | divcurl | compactness | incomparable
  std::string domainSpec = "cavity-cube 9 3";
  std::string family = "layered 1 4";  // coefficient family with parameters
  std::vector<int> indices = {1, 2, 3, 4};
  std::uint64_t seed = 7;
  int testModes = 8;
  int testRandoms = 16;
  std::string output;       // csv path; empty = stdout
  double energyTol = 0.1;   // relative final energy-gap tolerance
  double weakTol = 0.1;     // relative final weak-pairing tolerance
  double hypothesisCap = 1.0;  // divcurl H^-1 spread cap
  int blockDim = 64;        // incomparable: oscillating block size
  int workers = 1;          // filled from NLHC_WORKERS when unset
};

ScenarioConfig parse_scenario_config(const std::string& text);
ScenarioConfig read_scenario_config(const std::string& path);

struct Report {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::string> footer;  // emitted as trailing # comment lines
  bool pass = false;

  std::string csv() const;
  void writeCsv(const std::string& path) const;  // empty path -> stdout
  double cell(size_t row, const std::string& column) const;
};

// Per-index electrostatic solves against a coefficient family converging to
// its limit; records Schur distances, energies and weak pairing errors.
Report run_homogenisation(const ScenarioConfig& cfg);

// Pairing convergence <eps_n E_n, E_n> with the div/curl compactness
// surrogates; flags hypothesis violations instead of failing.
Report run_divcurl(const ScenarioConfig& cfg);

// ||E_n - E|| decay plus the coercivity sandwich inequality per index.
Report run_compactness(const ScenarioConfig& cfg);

// Interleaved block-diagonal family demonstrating incomparable Schur
// topologies for two nested splits.
Report run_incomparable(const ScenarioConfig& cfg);

Report run_scenario(const ScenarioConfig& cfg);

// Deterministic smooth trial data shared by scenarios, the CLI and tests.
Vec scenario_node_data(const GridComplex& cx, std::uint64_t seed);
Vec scenario_edge_field(const GridComplex& cx, std::uint64_t seed);

// Random-instance identity diagnostics (CSV rows: identity name, residual).
Report schur_identity_suite(std::uint64_t seed, int instances = 20);

}  // namespace nlhc
