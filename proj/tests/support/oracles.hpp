// Copyright 2026 The tbri Authors
// SPDX-License-Identifier: Apache-2.0

// Independent reference implementations used to check the library. None of
// these call into the code paths they check.

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "tbri/hamiltonian.hpp"

namespace oracle {

// ------------------------------------------------------- operator strings ---

struct Op {
  bool create;
  int orbital;
};

/// Applies ops right to left to the determinant a+_{o1} ... a+_{on}|0>,
/// o1 < ... < on, keeping the operator string explicitly and restoring order
/// with adjacent transpositions. Returns the resulting ordered orbital list
/// and sign, or nothing when the state is annihilated.
inline std::optional<std::pair<std::vector<int>, int>> apply_string(std::vector<int> orbitals,
                                                                    const std::vector<Op>& ops) {
  int sign = 1;
  for (auto it = ops.rbegin(); it != ops.rend(); ++it) {
    if (it->create) {
      if (std::find(orbitals.begin(), orbitals.end(), it->orbital) != orbitals.end()) {
        return std::nullopt;
      }
      orbitals.insert(orbitals.begin(), it->orbital);
      // Bubble the new creator to its sorted slot; each swap anticommutes.
      for (std::size_t k = 0; k + 1 < orbitals.size() && orbitals[k] > orbitals[k + 1]; ++k) {
        std::swap(orbitals[k], orbitals[k + 1]);
        sign = -sign;
      }
    } else {
      auto pos = std::find(orbitals.begin(), orbitals.end(), it->orbital);
      if (pos == orbitals.end()) return std::nullopt;
      // Move the matching creator to the front, then a a+ |rest> = |rest>.
      for (auto k = pos; k != orbitals.begin(); --k) {
        std::iter_swap(k, k - 1);
        sign = -sign;
      }
      orbitals.erase(orbitals.begin());
    }
  }
  return std::make_pair(std::move(orbitals), sign);
}

inline std::vector<int> orbitals_of(std::uint64_t mask) {
  std::vector<int> out;
  for (int s = 0; s < 64; ++s) {
    if ((mask >> s) & 1U) out.push_back(s);
  }
  return out;
}

// ------------------------------------------------- first quantization H ---

/// All ascending n-subsets of {0..m-1} in lexicographic order of the sorted
/// tuple read from the highest orbital down, which matches ascending bitmasks.
inline std::vector<std::vector<int>> subsets(int n, int m) {
  std::vector<std::vector<int>> out;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
    if (__builtin_popcountll(mask) == n) out.push_back(orbitals_of(mask));
  }
  return out;
}

inline std::size_t product_index(const std::vector<int>& slots, int m) {
  std::size_t idx = 0;
  for (int s : slots) idx = idx * static_cast<std::size_t>(m) + static_cast<std::size_t>(s);
  return idx;
}

/// Normalized antisymmetrized product vector for the ordered orbital list.
inline Eigen::VectorXd slater_vector(const std::vector<int>& orbitals, int m) {
  const auto n = orbitals.size();
  std::size_t dim = 1;
  for (std::size_t k = 0; k < n; ++k) dim *= static_cast<std::size_t>(m);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
  std::vector<std::size_t> perm(n);
  for (std::size_t k = 0; k < n; ++k) perm[k] = k;
  double norm = 0.0;
  do {
    int parity = 1;
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        if (perm[a] > perm[b]) parity = -parity;
      }
    }
    std::vector<int> slots(n);
    for (std::size_t k = 0; k < n; ++k) slots[k] = orbitals[perm[k]];
    v[static_cast<Eigen::Index>(product_index(slots, m))] += parity;
    norm += 1.0;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return v / std::sqrt(norm);
}

/// H = sum_i h(i) + sum_{i<j} v(i,j) on the m^n product space, with
/// <pq|v|rs> = V(p,q,r,s) / 2 built from the antisymmetric tensor, then
/// projected onto Slater determinants in ascending-bitmask order.
inline Eigen::MatrixXd first_quantized_hamiltonian(int n, int m, const std::vector<double>& eps,
                                                   const tbri::TwoBodyTensor& v) {
  std::size_t dim = 1;
  for (int k = 0; k < n; ++k) dim *= static_cast<std::size_t>(m);
  const auto d = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(d, d);

  std::vector<int> ket(static_cast<std::size_t>(n));
  for (std::size_t col = 0; col < dim; ++col) {
    std::size_t rest = col;
    for (int k = n - 1; k >= 0; --k) {
      ket[static_cast<std::size_t>(k)] = static_cast<int>(rest % static_cast<std::size_t>(m));
      rest /= static_cast<std::size_t>(m);
    }
    const auto c = static_cast<Eigen::Index>(col);
    for (int i = 0; i < n; ++i) h(c, c) += eps[static_cast<std::size_t>(ket[static_cast<std::size_t>(i)])];
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        const int r = ket[static_cast<std::size_t>(i)];
        const int s = ket[static_cast<std::size_t>(j)];
        for (int p = 0; p < m; ++p) {
          for (int q = 0; q < m; ++q) {
            const double amp = 0.5 * v(p, q, r, s);
            if (amp == 0.0) continue;
            std::vector<int> bra = ket;
            bra[static_cast<std::size_t>(i)] = p;
            bra[static_cast<std::size_t>(j)] = q;
            h(static_cast<Eigen::Index>(product_index(bra, m)), c) += amp;
          }
        }
      }
    }
  }

  const auto states = subsets(n, m);
  Eigen::MatrixXd phi(d, static_cast<Eigen::Index>(states.size()));
  for (std::size_t k = 0; k < states.size(); ++k) {
    phi.col(static_cast<Eigen::Index>(k)) = slater_vector(states[k], m);
  }
  return phi.transpose() * h * phi;
}

// ------------------------------------------------------ matrix exponential ---

/// exp(A) by scaling and squaring with a diagonal [8/8] Pade approximant.
inline Eigen::MatrixXcd expm(const Eigen::MatrixXcd& a) {
  const double norm = a.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Eigen::MatrixXcd x = a / std::ldexp(1.0, squarings);

  // c_k = (2q - k)! q! / ((2q)! k! (q - k)!), q = 8.
  constexpr int q = 8;
  std::vector<double> c(q + 1);
  c[0] = 1.0;
  for (int k = 1; k <= q; ++k) {
    c[static_cast<std::size_t>(k)] =
        c[static_cast<std::size_t>(k - 1)] * static_cast<double>(q - k + 1) /
        (static_cast<double>(k) * static_cast<double>(2 * q - k + 1));
  }
  const auto size = a.rows();
  Eigen::MatrixXcd num = Eigen::MatrixXcd::Identity(size, size) * c[0];
  Eigen::MatrixXcd den = num;
  Eigen::MatrixXcd power = Eigen::MatrixXcd::Identity(size, size);
  for (int k = 1; k <= q; ++k) {
    power = power * x;
    const double ck = c[static_cast<std::size_t>(k)];
    num += ck * power;
    den += ((k % 2) ? -ck : ck) * power;
  }
  Eigen::MatrixXcd result = den.partialPivLu().solve(num);
  for (int k = 0; k < squarings; ++k) result = result * result;
  return result;
}

/// psi(t) = exp(-i H t) e_i.
inline Eigen::VectorXcd propagate(const Eigen::MatrixXd& h, std::size_t i, double t) {
  const std::complex<double> minus_i{0.0, -1.0};
  const Eigen::MatrixXcd u = expm(minus_i * t * h.cast<std::complex<double>>());
  return u.col(static_cast<Eigen::Index>(i));
}

}  // namespace oracle
