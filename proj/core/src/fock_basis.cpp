// Copyright 2026 The tbri Authors
// SPDX-License-Identifier: Apache-2.0

#include "tbri/fock_basis.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "tbri/errors.hpp"

namespace tbri {

namespace {

// Guard against bases that could never be stored densely.
constexpr std::uint64_t kMaxBasisSize = std::uint64_t{1} << 28;

int sign_below(Bitmask occupancy, int s) noexcept {
  const Bitmask below = occupancy & ((Bitmask{1} << s) - 1);
  return (std::popcount(below) & 1) ? -1 : 1;
}

}  // namespace

std::vector<int> FockState::orbitals() const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(particle_count()));
  for (Bitmask rest = occupancy; rest != 0; rest &= rest - 1) {
    out.push_back(std::countr_zero(rest));
  }
  return out;
}

FockState FockState::from_orbitals(std::initializer_list<int> orbitals) {
  return from_orbitals(std::span<const int>(orbitals.begin(), orbitals.size()));
}

FockState FockState::from_orbitals(std::span<const int> orbitals) {
  FockState state;
  for (int s : orbitals) {
    if (s < 0 || s >= kMaxOrbitals) {
      throw ParameterError("orbital index " + std::to_string(s) + " out of range");
    }
    const Bitmask bit = Bitmask{1} << s;
    if (state.occupancy & bit) {
      throw ParameterError("orbital " + std::to_string(s) + " listed twice");
    }
    state.occupancy |= bit;
  }
  return state;
}

std::uint64_t binomial(int m, int n) {
  if (n < 0 || m < 0 || n > m) return 0;
  n = std::min(n, m - n);
  std::uint64_t result = 1;
  for (int k = 1; k <= n; ++k) {
    const std::uint64_t numerator = static_cast<std::uint64_t>(m - n + k);
    if (result > std::numeric_limits<std::uint64_t>::max() / numerator) {
      throw ParameterError("binomial coefficient overflows 64 bits");
    }
    // result * numerator is divisible by k at every step.
    result = result * numerator / static_cast<std::uint64_t>(k);
  }
  return result;
}

Basis::Basis(int n, int m, std::vector<FockState> states)
    : n_(n), m_(m), states_(std::move(states)) {
  index_.reserve(states_.size());
  for (std::size_t i = 0; i < states_.size(); ++i) {
    index_.emplace(states_[i].occupancy, i);
  }
}

Basis Basis::build(int n, int m) {
  if (m <= 0 || m > kMaxOrbitals) {
    throw ParameterError("orbital count m=" + std::to_string(m) + " outside [1, " +
                         std::to_string(kMaxOrbitals) + "]");
  }
  if (n <= 0 || n > m) {
    throw ParameterError("particle count n=" + std::to_string(n) + " outside [1, m=" +
                         std::to_string(m) + "]");
  }
  const std::uint64_t count = binomial(m, n);
  if (count > kMaxBasisSize) {
    throw ParameterError("basis of " + std::to_string(count) + " states is too large");
  }

  std::vector<FockState> states;
  states.reserve(count);
  // Gosper's hack enumerates fixed-popcount masks in ascending order.
  Bitmask mask = (Bitmask{1} << n) - 1;
  const Bitmask limit = Bitmask{1} << m;
  while (mask < limit) {
    states.push_back(FockState{mask});
    const Bitmask lowest = mask & (~mask + 1);
    const Bitmask ripple = mask + lowest;
    mask = (((ripple ^ mask) >> 2) / lowest) | ripple;
  }
  return Basis(n, m, std::move(states));
}

std::optional<std::size_t> Basis::find(FockState state) const {
  const auto it = index_.find(state.occupancy);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t Basis::index_of(FockState state) const {
  if (auto idx = find(state)) return *idx;
  throw LookupError("state " + std::to_string(state.occupancy) + " is not in the basis (n=" +
                    std::to_string(n_) + ", m=" + std::to_string(m_) + ")");
}

OrbitalDifference orbital_difference(FockState f, FockState g) {
  OrbitalDifference diff;
  for (Bitmask rest = f.occupancy & ~g.occupancy; rest != 0; rest &= rest - 1) {
    diff.removed.push_back(std::countr_zero(rest));
  }
  for (Bitmask rest = g.occupancy & ~f.occupancy; rest != 0; rest &= rest - 1) {
    diff.added.push_back(std::countr_zero(rest));
  }
  return diff;
}

int fermionic_phase(FockState state, OrbitalPair annihilate, OrbitalPair create) {
  const auto valid_pair = [](OrbitalPair p) {
    return p[0] >= 0 && p[0] < p[1] && p[1] < kMaxOrbitals;
  };
  if (!valid_pair(annihilate) || !valid_pair(create)) {
    throw PreconditionError("orbital pairs must be strictly ascending and in range");
  }

  Bitmask occ = state.occupancy;
  int sign = 1;
  // Rightmost operator acts first: a_{a0}, a_{a1}, a+_{c1}, a+_{c0}.
  for (int s : {annihilate[0], annihilate[1]}) {
    if (!((occ >> s) & 1U)) {
      throw PreconditionError("annihilated orbital " + std::to_string(s) + " is empty");
    }
    sign *= sign_below(occ, s);
    occ &= ~(Bitmask{1} << s);
  }
  for (int s : {create[1], create[0]}) {
    if ((occ >> s) & 1U) {
      throw PreconditionError("created orbital " + std::to_string(s) + " is occupied");
    }
    sign *= sign_below(occ, s);
    occ |= Bitmask{1} << s;
  }
  return sign;
}

std::vector<std::size_t> ClassPartition::sizes() const {
  std::vector<std::size_t> counts(static_cast<std::size_t>(max_class) + 1, 0);
  for (int c : class_of) ++counts[static_cast<std::size_t>(c)];
  return counts;
}

ClassPartition classify(const Basis& basis, FockState reference) {
  basis.index_of(reference);  // throws LookupError

  ClassPartition partition;
  partition.reference = reference;
  partition.max_class =
      cascade_class(std::min(basis.particles(), basis.orbitals() - basis.particles()));
  partition.class_of.reserve(basis.size());
  for (const FockState& state : basis.states()) {
    partition.class_of.push_back(cascade_class(orbitals_moved(reference, state)));
  }
  return partition;
}

}  // namespace tbri
