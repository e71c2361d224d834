// Copyright 2026 The tbri Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file fock_basis.hpp
 * @brief Slater-determinant basis of n fermions on m orbitals.
 *
 * A basis state is a bitmask: orbital s is occupied iff bit s is set.
 * States are kept in ascending bitmask order, which is the canonical index.
 *
 * Operator ordering convention: within a pair, creation and annihilation
 * operators are listed in ascending orbital index. A two-body term acting on
 * |f> is a+_{c0} a+_{c1} a_{a1} a_{a0} |f> with a0 < a1 and c0 < c1; the
 * sign of each single operator is (-1)^(number of occupied orbitals below it).
 */

#pragma once

#include <array>
#include <bit>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

namespace tbri {

using Bitmask = std::uint64_t;

/// Largest orbital count representable by a Bitmask.
inline constexpr int kMaxOrbitals = 63;

struct FockState {
  Bitmask occupancy = 0;

  constexpr bool occupied(int s) const noexcept { return (occupancy >> s) & 1U; }
  constexpr int particle_count() const noexcept { return std::popcount(occupancy); }

  /// Occupied orbital indices, ascending.
  std::vector<int> orbitals() const;

  static FockState from_orbitals(std::initializer_list<int> orbitals);
  static FockState from_orbitals(std::span<const int> orbitals);

  friend constexpr auto operator<=>(const FockState&, const FockState&) = default;
};

class Basis {
 public:
  /// All binomial(m, n) states in ascending bitmask order.
  static Basis build(int n, int m);

  int particles() const noexcept { return n_; }
  int orbitals() const noexcept { return m_; }
  std::size_t size() const noexcept { return states_.size(); }

  const FockState& operator[](std::size_t index) const { return states_[index]; }
  std::span<const FockState> states() const noexcept { return states_; }

  std::optional<std::size_t> find(FockState state) const;
  /// Throws LookupError when the state is not part of the basis.
  std::size_t index_of(FockState state) const;

 private:
  Basis(int n, int m, std::vector<FockState> states);

  int n_ = 0;
  int m_ = 0;
  std::vector<FockState> states_;
  std::unordered_map<Bitmask, std::size_t> index_;
};

/// binomial(m, n); throws ParameterError on overflow of 64 bits.
std::uint64_t binomial(int m, int n);

struct OrbitalDifference {
  std::vector<int> removed;  ///< occupied in f, empty in g
  std::vector<int> added;    ///< occupied in g, empty in f
};

OrbitalDifference orbital_difference(FockState f, FockState g);

/// Number of orbitals that must move to turn f into g (half the Hamming distance).
inline int orbitals_moved(FockState f, FockState g) noexcept {
  return std::popcount(f.occupancy ^ g.occupancy) / 2;
}

using OrbitalPair = std::array<int, 2>;

/// Sign of a+_{c0} a+_{c1} a_{a1} a_{a0} |state>.
///
/// Both pairs must be strictly ascending, the annihilated orbitals occupied in
/// `state` and the created orbitals empty after annihilation; otherwise throws
/// PreconditionError.
int fermionic_phase(FockState state, OrbitalPair annihilate, OrbitalPair create);

/// Cascade classes relative to a reference state. Class s holds the states
/// reachable from the reference by s two-body moves and no fewer, i.e.
/// s = ceil(orbitals_moved / 2).
struct ClassPartition {
  FockState reference;
  std::vector<int> class_of;  ///< indexed by basis position
  int max_class = 0;          ///< n_c = ceil(min(n, m - n) / 2)

  /// N_s for s = 0..max_class.
  std::vector<std::size_t> sizes() const;
};

ClassPartition classify(const Basis& basis, FockState reference);

/// Class of a state that has `moved` orbitals displaced from the reference.
constexpr int cascade_class(int moved) noexcept { return (moved + 1) / 2; }

}  // namespace tbri
