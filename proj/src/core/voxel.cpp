#include "voxel.hpp"

#include <json.hpp>

#include <fstream>
#include <random>
#include <sstream>

namespace nlhc {

namespace {

VoxelDomain box(int nx, int ny, int nz, std::uint8_t fillValue) {
  require(nx > 0 && ny > 0 && nz > 0, Err::Structural, "domain shape must be positive");
  VoxelDomain d;
  d.nx = nx;
  d.ny = ny;
  d.nz = nz;
  d.h = 1.0 / std::max(nx, std::max(ny, nz));
  d.mask.assign(static_cast<size_t>(nx) * ny * nz, fillValue);
  return d;
}

void setVoxel(VoxelDomain& d, int i, int j, int k, std::uint8_t v) {
  d.mask[static_cast<size_t>(i) +
         static_cast<size_t>(d.nx) * (static_cast<size_t>(j) + static_cast<size_t>(d.ny) * k)] = v;
}

}  // namespace

std::size_t VoxelDomain::occupiedCount() const {
  std::size_t n = 0;
  for (auto v : mask) n += v ? 1 : 0;
  return n;
}

VoxelDomain solid_cube(int n) { return box(n, n, n, 1); }

VoxelDomain cavity_cube(int n, int m) {
  if (m < 0) {
    m = n / 3;
    if ((n - m) % 2 != 0) --m;
  }
  require(m >= 1 && m < n && (n - m) % 2 == 0, Err::Structural,
          "cavity_cube: cavity must be centered (n-m even, 1 <= m < n)");
  VoxelDomain d = solid_cube(n);
  int lo = (n - m) / 2;
  for (int k = lo; k < lo + m; ++k)
    for (int j = lo; j < lo + m; ++j)
      for (int i = lo; i < lo + m; ++i) setVoxel(d, i, j, k, 0);
  return d;
}

VoxelDomain two_cavity() {
  VoxelDomain d = solid_cube(11);
  int lo = 4;  // y,z margin (11-3)/2
  for (int k = lo; k < lo + 3; ++k)
    for (int j = lo; j < lo + 3; ++j) {
      for (int i = 2; i < 5; ++i) setVoxel(d, i, j, k, 0);
      for (int i = 6; i < 9; ++i) setVoxel(d, i, j, k, 0);
    }
  return d;
}

VoxelDomain random_mask(int nx, int ny, int nz, double fill, std::uint64_t seed) {
  VoxelDomain d = box(nx, ny, nz, 0);
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution bit(fill);
  for (auto& v : d.mask) v = bit(rng) ? 1 : 0;
  return d;
}

VoxelDomain replicate_domain(const VoxelDomain& d, int k, int gap) {
  require(k >= 1, Err::Structural, "replicate_domain: k must be >= 1");
  require(gap >= 1, Err::Structural, "replicate_domain: gap must be >= 1");
  long width = static_cast<long>(k) * d.nx + static_cast<long>(k - 1) * gap;
  require(width < (1L << 20), Err::Structural, "replicate_domain: shape overflow");
  VoxelDomain r = box(static_cast<int>(width), d.ny, d.nz, 0);
  r.h = d.h;
  for (int copy = 0; copy < k; ++copy) {
    int off = copy * (d.nx + gap);
    for (int kk = 0; kk < d.nz; ++kk)
      for (int j = 0; j < d.ny; ++j)
        for (int i = 0; i < d.nx; ++i)
          if (d.occupied(i, j, kk)) setVoxel(r, off + i, j, kk, 1);
  }
  return r;
}

VoxelDomain parse_domain(const std::string& spec) {
  std::istringstream in(spec);
  std::string head;
  in >> head;
  require(!head.empty(), Err::Parse, "empty domain spec");
  if (head == "solid-cube") {
    int n = 0;
    in >> n;
    require(n > 0, Err::Parse, "solid-cube: expected positive size");
    return solid_cube(n);
  }
  if (head == "cavity-cube") {
    int n = 0, m = -1;
    in >> n;
    require(n > 0, Err::Parse, "cavity-cube: expected positive size");
    if (!(in >> m)) m = -1;
    return cavity_cube(n, m);
  }
  if (head == "two-cavity") return two_cavity();
  if (head == "replicated") {
    int k = 0, gap = 2;
    in >> k;
    require(k >= 1, Err::Parse, "replicated: expected copy count");
    if (!(in >> gap)) gap = 2;
    std::string rest;
    std::getline(in, rest);
    VoxelDomain base = rest.find_first_not_of(" \t") == std::string::npos
                           ? cavity_cube(9, 3)
                           : parse_domain(rest.substr(rest.find_first_not_of(" \t")));
    return replicate_domain(base, k, gap);
  }
  if (head == "random-mask") {
    int nx = 0, ny = 0, nz = 0;
    double fill = 0.7;
    std::uint64_t seed = 1;
    in >> nx >> ny >> nz >> fill >> seed;
    require(nx > 0 && ny > 0 && nz > 0, Err::Parse, "random-mask: expected shape");
    return random_mask(nx, ny, nz, fill, seed);
  }
  // otherwise treat as a file path
  return read_domain_file(spec);
}

VoxelDomain domain_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    fail(Err::Parse, std::string("domain json: ") + e.what());
  }
  try {
    auto shape = j.at("shape");
    VoxelDomain d = box(shape.at(0).get<int>(), shape.at(1).get<int>(), shape.at(2).get<int>(), 0);
    if (j.contains("h")) d.h = j.at("h").get<double>();
    require(d.h > 0, Err::Parse, "domain json: h must be positive");
    auto rle = j.at("rle");
    require(rle.size() % 2 == 0, Err::Parse, "domain json: rle must be (count,value) pairs");
    size_t pos = 0;
    for (size_t q = 0; q < rle.size(); q += 2) {
      auto count = rle.at(q).get<std::int64_t>();
      auto value = rle.at(q + 1).get<int>();
      require(count >= 0 && (value == 0 || value == 1), Err::Parse, "domain json: bad rle entry");
      require(pos + static_cast<size_t>(count) <= d.mask.size(), Err::Parse,
              "domain json: rle overruns the shape");
      for (std::int64_t t = 0; t < count; ++t) d.mask[pos++] = static_cast<std::uint8_t>(value);
    }
    require(pos == d.mask.size(), Err::Parse, "domain json: rle does not fill the shape");
    return d;
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail(Err::Parse, std::string("domain json: ") + e.what());
  }
}

std::string domain_to_json(const VoxelDomain& d) {
  nlohmann::json rle = nlohmann::json::array();
  size_t pos = 0;
  while (pos < d.mask.size()) {
    size_t run = pos;
    while (run < d.mask.size() && d.mask[run] == d.mask[pos]) ++run;
    rle.push_back(run - pos);
    rle.push_back(static_cast<int>(d.mask[pos]));
    pos = run;
  }
  nlohmann::json j;
  j["shape"] = {d.nx, d.ny, d.nz};
  j["h"] = d.h;
  j["rle"] = rle;
  return j.dump();
}

VoxelDomain read_domain_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), Err::Parse, "cannot open domain file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return domain_from_json(buf.str());
}

}  // namespace nlhc
