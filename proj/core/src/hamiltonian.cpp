// Copyright 2026 The tbri Authors
// SPDX-License-Identifier: Apache-2.0

#include "tbri/hamiltonian.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "tbri/errors.hpp"
#include "tbri/rng.hpp"

namespace tbri {

namespace {

constexpr std::uint64_t kSpectrumStream = 0x5350454354525531ULL;  // "SPECTRU1"
constexpr std::uint64_t kTensorStream = 0x54454E534F523031ULL;    // "TENSOR01"
constexpr char kHamiltonianMagic[8] = {'T', 'B', 'R', 'I', 'H', 'A', 'M', '1'};

OrbitalPair sorted_pair(int a, int b) { return a < b ? OrbitalPair{a, b} : OrbitalPair{b, a}; }

template <typename T>
void put(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  return value;
}

}  // namespace

void ModelParams::validate() const {
  if (!(d0 > 0.0) || !std::isfinite(d0)) throw ParameterError("d0 must be positive");
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw ParameterError("eta must be non-negative");
  if (!(jitter >= 0.0 && jitter < 1.0)) throw ParameterError("jitter must lie in [0, 1)");
  if (m <= 0 || m > kMaxOrbitals) throw ParameterError("m out of range: " + std::to_string(m));
  if (n <= 0 || n > m) throw ParameterError("n must satisfy 0 < n <= m");
}

double SingleParticleSpectrum::mean_spacing() const {
  if (epsilon.size() < 2) return 0.0;
  return (epsilon.back() - epsilon.front()) / static_cast<double>(epsilon.size() - 1);
}

SingleParticleSpectrum sample_spectrum(const ModelParams& params) {
  params.validate();
  SingleParticleSpectrum spectrum;
  spectrum.epsilon.resize(static_cast<std::size_t>(params.m));
  Rng rng(params.seed, kSpectrumStream);
  for (int s = 0; s < params.m; ++s) {
    double level = params.d0 * s;
    if (params.jitter > 0.0) level += params.jitter * params.d0 * (rng.uniform() - 0.5);
    spectrum.epsilon[static_cast<std::size_t>(s)] = level;
  }
  // jitter < 1 keeps the levels ordered; sort anyway for the invariant.
  std::sort(spectrum.epsilon.begin(), spectrum.epsilon.end());
  return spectrum;
}

TwoBodyTensor::TwoBodyTensor(int m)
    : m_(m), pairs_(static_cast<std::size_t>(m) * static_cast<std::size_t>(m - 1) / 2) {
  if (m < 1 || m > kMaxOrbitals) throw ParameterError("tensor orbital count out of range");
  packed_.assign(pairs_ * (pairs_ + 1) / 2, 0.0);
}

std::size_t TwoBodyTensor::pair_index(int p, int q, int m) {
  const auto up = static_cast<std::size_t>(p);
  const auto um = static_cast<std::size_t>(m);
  return up * (2 * um - up - 1) / 2 + static_cast<std::size_t>(q - p - 1);
}

std::size_t TwoBodyTensor::packed_index(std::size_t a, std::size_t b) const {
  if (a > b) std::swap(a, b);
  return a * pairs_ - a * (a - 1) / 2 + (b - a);
}

double TwoBodyTensor::canonical(std::size_t pq, std::size_t rs) const {
  return packed_[packed_index(pq, rs)];
}

void TwoBodyTensor::set_canonical(std::size_t pq, std::size_t rs, double value) {
  packed_[packed_index(pq, rs)] = value;
}

double TwoBodyTensor::operator()(int p, int q, int r, int s) const {
  if (p == q || r == s) return 0.0;
  double sign = 1.0;
  if (p > q) {
    std::swap(p, q);
    sign = -sign;
  }
  if (r > s) {
    std::swap(r, s);
    sign = -sign;
  }
  return sign * canonical(pair_index(p, q, m_), pair_index(r, s, m_));
}

TwoBodyTensor TwoBodyTensor::scaled(double factor) const {
  TwoBodyTensor out(*this);
  for (double& v : out.packed_) v *= factor;
  return out;
}

TwoBodyTensor sample_two_body(const ModelParams& params) {
  params.validate();
  TwoBodyTensor tensor(params.m);
  if (params.eta == 0.0) return tensor;
  const double scale = std::sqrt(params.eta) * params.d0;
  Rng rng(params.seed, kTensorStream);
  const std::size_t pairs = tensor.pair_count();
  for (std::size_t a = 0; a < pairs; ++a) {
    for (std::size_t b = a; b < pairs; ++b) {
      tensor.set_canonical(a, b, scale * rng.normal());
    }
  }
  return tensor;
}

HamiltonianMatrix::HamiltonianMatrix(std::shared_ptr<const Basis> basis, Eigen::MatrixXd entries)
    : basis_(std::move(basis)), entries_(std::move(entries)) {
  if (!basis_) throw ParameterError("Hamiltonian requires a basis");
  const auto n = static_cast<Eigen::Index>(basis_->size());
  if (entries_.rows() != n || entries_.cols() != n) {
    throw ParameterError("Hamiltonian dimension does not match the basis size");
  }
}

double matrix_element(FockState f, FockState g, const SingleParticleSpectrum& spectrum,
                      const TwoBodyTensor& tensor, HamiltonianOptions options) {
  const int moved = orbitals_moved(f, g);
  const int m = tensor.orbitals();

  if (moved == 0) {
    double energy = 0.0;
    const std::vector<int> occ = f.orbitals();
    for (int s : occ) energy += spectrum.epsilon[static_cast<std::size_t>(s)];
    if (options.include_diagonal_pairs) {
      for (std::size_t a = 0; a < occ.size(); ++a) {
        for (std::size_t b = a + 1; b < occ.size(); ++b) {
          const std::size_t pair = TwoBodyTensor::pair_index(occ[a], occ[b], m);
          energy += tensor.canonical(pair, pair);
        }
      }
    }
    return energy;
  }

  const OrbitalDifference diff = orbital_difference(f, g);
  if (moved == 1) {
    if (!options.include_single_moves) return 0.0;
    // <f| a+_p a+_s a_s a_q |g> summed over spectators s.
    const int p = diff.removed[0];
    const int q = diff.added[0];
    double element = 0.0;
    for (Bitmask rest = f.occupancy & g.occupancy; rest != 0; rest &= rest - 1) {
      const int s = std::countr_zero(rest);
      const OrbitalPair created = sorted_pair(p, s);
      const OrbitalPair annihilated = sorted_pair(q, s);
      const double v = tensor.canonical(TwoBodyTensor::pair_index(created[0], created[1], m),
                                        TwoBodyTensor::pair_index(annihilated[0], annihilated[1], m));
      element += fermionic_phase(g, annihilated, created) * v;
    }
    return element;
  }

  if (moved == 2) {
    const OrbitalPair created{diff.removed[0], diff.removed[1]};
    const OrbitalPair annihilated{diff.added[0], diff.added[1]};
    const double v = tensor.canonical(TwoBodyTensor::pair_index(created[0], created[1], m),
                                      TwoBodyTensor::pair_index(annihilated[0], annihilated[1], m));
    return fermionic_phase(g, annihilated, created) * v;
  }
  return 0.0;
}

HamiltonianMatrix build_hamiltonian(std::shared_ptr<const Basis> basis,
                                    const SingleParticleSpectrum& spectrum,
                                    const TwoBodyTensor& tensor, HamiltonianOptions options) {
  if (!basis) throw ParameterError("build_hamiltonian: null basis");
  const int m = basis->orbitals();
  if (spectrum.size() != m || tensor.orbitals() != m) {
    throw ParameterError("build_hamiltonian: spectrum/tensor orbital count differs from basis m=" +
                         std::to_string(m));
  }

  const auto dim = static_cast<Eigen::Index>(basis->size());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  const Bitmask all = (Bitmask{1} << m) - 1;

  for (std::size_t col = 0; col < basis->size(); ++col) {
    const FockState f = (*basis)[col];
    const auto c = static_cast<Eigen::Index>(col);
    h(c, c) = matrix_element(f, f, spectrum, tensor, options);

    const Bitmask holes = all & ~f.occupancy;
    auto store = [&](Bitmask target) {
      const FockState g{target};
      if (g.occupancy <= f.occupancy) return;  // each unordered pair once
      const auto r = static_cast<Eigen::Index>(basis->index_of(g));
      const double value = matrix_element(g, f, spectrum, tensor, options);
      h(r, c) = value;
      h(c, r) = value;
    };

    for (Bitmask occ = f.occupancy; occ != 0; occ &= occ - 1) {
      const Bitmask p = occ & (~occ + 1);
      if (options.include_single_moves) {
        for (Bitmask emp = holes; emp != 0; emp &= emp - 1) {
          store(f.occupancy ^ p ^ (emp & (~emp + 1)));
        }
      }
      for (Bitmask occ2 = occ & (occ - 1); occ2 != 0; occ2 &= occ2 - 1) {
        const Bitmask q = occ2 & (~occ2 + 1);
        for (Bitmask emp = holes; emp != 0; emp &= emp - 1) {
          const Bitmask r = emp & (~emp + 1);
          for (Bitmask emp2 = emp & (emp - 1); emp2 != 0; emp2 &= emp2 - 1) {
            store(f.occupancy ^ p ^ q ^ r ^ (emp2 & (~emp2 + 1)));
          }
        }
      }
    }
  }
  return HamiltonianMatrix(std::move(basis), std::move(h));
}

HamiltonianMatrix build_model(const ModelParams& params) {
  params.validate();
  auto basis = std::make_shared<const Basis>(Basis::build(params.n, params.m));
  return build_hamiltonian(std::move(basis), sample_spectrum(params), sample_two_body(params),
                           {params.include_single_moves, params.include_diagonal_pairs});
}

void write_hamiltonian(const std::filesystem::path& path, const HamiltonianMatrix& h,
                       const ModelParams& params) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(kHamiltonianMagic, sizeof(kHamiltonianMagic));
  put<std::int32_t>(out, params.n);
  put<std::int32_t>(out, params.m);
  put<std::uint64_t>(out, params.seed);
  put<double>(out, params.eta);
  put<double>(out, params.d0);
  put<std::uint64_t>(out, h.size());
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows = h.entries();
  out.write(reinterpret_cast<const char*>(rows.data()),
            static_cast<std::streamsize>(rows.size() * sizeof(double)));
  if (!out) throw IoError("write failed for " + path.string());
}

HamiltonianDump read_hamiltonian(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[sizeof(kHamiltonianMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kHamiltonianMagic, sizeof(magic)) != 0) {
    throw IoError(path.string() + " is not a Hamiltonian dump");
  }
  HamiltonianDump dump;
  dump.params.n = get<std::int32_t>(in);
  dump.params.m = get<std::int32_t>(in);
  dump.params.seed = get<std::uint64_t>(in);
  dump.params.eta = get<double>(in);
  dump.params.d0 = get<double>(in);
  const auto dim = static_cast<Eigen::Index>(get<std::uint64_t>(in));
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows(dim, dim);
  in.read(reinterpret_cast<char*>(rows.data()),
          static_cast<std::streamsize>(rows.size() * sizeof(double)));
  if (!in) throw IoError("truncated Hamiltonian dump " + path.string());
  dump.entries = rows;
  return dump;
}

}  // namespace tbri
