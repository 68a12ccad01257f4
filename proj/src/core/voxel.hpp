#pragma once

#include "types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace nlhc {

// Axis-aligned voxel region; mask is indexed x-fastest: idx = i + nx*(j + ny*k).
struct VoxelDomain {
  int nx = 0, ny = 0, nz = 0;
  double h = 1.0;
  std::vector<std::uint8_t> mask;

  bool inGrid(int i, int j, int k) const {
    return i >= 0 && j >= 0 && k >= 0 && i < nx && j < ny && k < nz;
  }
  bool occupied(int i, int j, int k) const {
    return inGrid(i, j, k) && mask[static_cast<size_t>(i) + static_cast<size_t>(nx) *
                                                               (static_cast<size_t>(j) +
                                                                static_cast<size_t>(ny) * k)] != 0;
  }
  std::size_t occupiedCount() const;
};

VoxelDomain solid_cube(int n);
// n^3 cube with a centered m^3 cavity removed; m defaults to the largest
// admissible value <= n/3 with n-m even.
VoxelDomain cavity_cube(int n, int m = -1);
// 11^3 cube with two disjoint 3^3 cavities.
VoxelDomain two_cavity();
VoxelDomain random_mask(int nx, int ny, int nz, double fill, std::uint64_t seed);

// k translated non-touching copies along x separated by `gap` empty voxels.
VoxelDomain replicate_domain(const VoxelDomain& d, int k, int gap);

// Fixture strings ("solid-cube 9", "cavity-cube 9 3", "two-cavity",
// "replicated 2 [gap [base-fixture...]]") or a JSON file path.
VoxelDomain parse_domain(const std::string& spec);

VoxelDomain domain_from_json(const std::string& text);
std::string domain_to_json(const VoxelDomain& d);
VoxelDomain read_domain_file(const std::string& path);

}  // namespace nlhc
