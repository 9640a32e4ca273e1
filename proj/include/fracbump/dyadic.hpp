#pragma once

#include <compare>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fracbump/grid.hpp"

namespace fracbump {

/// Lattice address: depth d and per-axis index in [0, 2^d).
struct CubeAddress {
  int depth = 0;
  std::size_t i = 0;
  std::size_t j = 0;

  auto operator<=>(const CubeAddress&) const = default;
  bool operator==(const CubeAddress&) const = default;
};

/// The dyadic lattice aligned with the box: the root and its repeated 2^dim subdivisions
/// down to single cells.
class DyadicLattice {
 public:
  explicit DyadicLattice(const Domain& domain);

  const Domain& domain() const { return domain_; }
  int max_depth() const { return max_depth_; }
  CubeRegion root() const { return CubeRegion::whole(domain_); }

  bool valid(const CubeAddress& a) const;
  CubeRegion cube(const CubeAddress& a) const;
  /// Address of a region if it is a lattice cube.
  std::optional<CubeAddress> address_of(const CubeRegion& q) const;
  std::vector<CubeAddress> children(const CubeAddress& a) const;
  std::optional<CubeAddress> parent(const CubeAddress& a) const;
  /// True when `outer` contains `inner` (a cube contains itself).
  bool contains(const CubeAddress& outer, const CubeAddress& inner) const;
  /// Cells per side of a cube at depth d.
  std::size_t side_at(int depth) const { return domain_.n_cells() >> depth; }

  std::string format(const CubeAddress& a) const;
  CubeAddress parse(const std::string& text) const;

 private:
  Domain domain_;
  int max_depth_;
};

/// All lattice cubes with at least `min_cells_per_side` cells per side, ordered by depth
/// and then by (j, i).
std::vector<CubeRegion> enumerate_cubes(const DyadicLattice& lat, std::size_t min_cells_per_side);

/// A family of lattice cubes with disjoint subsets E_Q ⊆ Q stored as flat cell indices.
struct SparseFamily {
  DyadicLattice lattice;
  std::vector<CubeAddress> cubes;
  std::vector<std::vector<std::size_t>> certificate;
  double eta = 1.0;

  std::size_t size() const { return cubes.size(); }
  CubeRegion cube(std::size_t k) const { return lattice.cube(cubes[k]); }
};

/// Calderón–Zygmund stopping time on |f| with threshold factor tau. Cubes with fewer than
/// `min_side` cells per side never stop.
SparseFamily construct_sparse_family(const GridFunction& f, const DyadicLattice& lat, double tau,
                                     std::size_t min_side = 4);

/// Validates the stored certificate and returns the largest certified eta among the
/// stored certificate and a greedy smallest-cube assignment.
double sparsity_verify(const SparseFamily& s);

/// Σ_Q avg_Q|f| |E_Q| divided by ∫|f|.
double family_mass_ratio(const GridFunction& f, const SparseFamily& s);

void write_sparse_family(std::ostream& os, const SparseFamily& s);
SparseFamily read_sparse_family(std::istream& is);

}  // namespace fracbump
