// Copyright 2026 The tbri Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file experiment.hpp
 * @brief End-to-end thermalization experiment: configuration, the
 *        basis -> H -> eigenstates -> strength -> dynamics -> theory pipeline,
 *        and the files it writes.
 *
 * Config files are JSON (config_version 1). Every field is optional and
 * defaults to the values below; unknown keys are rejected.
 *
 *   {
 *     "config_version": 1,
 *     "model": {"n": 6, "m": 12, "d0": 1.0, "eta": 0.003, "seed": 1,
 *               "jitter": 0.0, "single_moves": true, "diagonal_pairs": true},
 *     "initial_state": "mid-spectrum" | "0b000000111111" | 63,
 *     "grid": "default" | "linear:T0:T1:COUNT" | "log:T0:T1:COUNT" | "list:t0,t1,...",
 *     "analysis": {"fits": true, "class_populations": true, "fermi_dirac": true,
 *                  "long_time_samples": 200},
 *     "output": {"directory": "tbri-out", "format": "csv",
 *                "hamiltonian_binary": false, "decomposition_binary": false}
 *   }
 *
 * A manifest.json written by run() is also accepted; its "config" member is used.
 */

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tbri/dynamics.hpp"
#include "tbri/errors.hpp"
#include "tbri/hamiltonian.hpp"
#include "tbri/strength.hpp"
#include "tbri/table.hpp"
#include "tbri/theory.hpp"

namespace tbri {

inline constexpr int kConfigVersion = 1;
inline constexpr int kManifestVersion = 1;

enum class OutputFormat { Csv, Json };

struct InitialStateRule {
  enum class Kind { MidSpectrum, Explicit };
  Kind kind = Kind::MidSpectrum;
  Bitmask bitmask = 0;

  /// "mid-spectrum", "0b1011", "0x3f" or a decimal integer.
  static InitialStateRule parse(std::string_view text);
  std::string to_string() const;
};

struct AnalysisToggles {
  bool fits = true;
  bool class_populations = true;
  bool fermi_dirac = true;
  std::size_t long_time_samples = 200;
};

struct OutputOptions {
  std::filesystem::path directory = "tbri-out";
  OutputFormat format = OutputFormat::Csv;
  bool hamiltonian_binary = false;
  bool decomposition_binary = false;
};

struct ExperimentConfig {
  ModelParams model;
  InitialStateRule initial_state;
  std::string grid = "default";
  AnalysisToggles analysis;
  OutputOptions output;

  /// n=6, m=12, d0=1, weak interaction (eta = 0.003).
  static ExperimentConfig preset_fig1();
  /// n=6, m=12, d0=1, strong interaction (eta = 0.083).
  static ExperimentConfig preset_fig2();
};

/// Throws ConfigError with the offending key.
ExperimentConfig parse_config(std::string_view json_text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// Canonical JSON (fixed key order), the input of the config hash.
std::string serialize_config(const ExperimentConfig& config);
std::string config_hash(const ExperimentConfig& config);

/// Grid spec: "default" | "linear:T0:T1:COUNT" | "log:T0:T1:COUNT" | "list:..." | "empty".
/// "default" needs the spreading scales; see TimeGrid::standard.
TimeGrid parse_grid_spec(std::string_view spec, double delta_e, double gamma, int max_class,
                         double d0);
/// Validates a spec without the spreading scales (throws ConfigError).
void validate_grid_spec(std::string_view spec);

/// Mid-spectrum: the basis state whose H_ii is closest to the median of all
/// H_ff (ties: lowest index). Explicit: the bitmask, validated against the basis
/// (ConfigError on wrong particle count or out-of-range orbitals).
std::size_t select_initial_state(const HamiltonianMatrix& h, const InitialStateRule& rule);

/// Provenance and identity stamped into every output file.
struct OutputMeta {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string config_json;
};

/// Exact-vs-predicted plot data. Returns the written file names (relative to outdir).
std::vector<std::string> emit_plotdata(const OccupationTrajectory& trajectory,
                                       const ThermalizationPrediction& prediction,
                                       const std::optional<SurvivalModels>& models,
                                       const OutputMeta& meta,
                                       const std::filesystem::path& outdir,
                                       OutputFormat format = OutputFormat::Csv);

Table trajectory_table(const OccupationTrajectory& trajectory, const OutputMeta& meta);
Table prediction_table(const OccupationTrajectory& trajectory,
                       const std::vector<ThermalizationPrediction>& predictions,
                       const OutputMeta& meta);
Table profile_table(const StrengthProfile& profile, const OutputMeta& meta);
Table plotdata_table(const OccupationTrajectory& trajectory,
                     const ThermalizationPrediction& prediction,
                     const std::optional<SurvivalModels>& models, const OutputMeta& meta);

struct FileRecord {
  std::string name;
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct FitSummary {
  std::string status = "skipped";  ///< ok | skipped | failed
  std::string detail;
};

struct RunManifest {
  ExperimentConfig config;
  std::string config_hash;
  std::uint64_t seed = 0;

  std::size_t basis_size = 0;
  std::size_t initial_index = 0;
  Bitmask initial_state = 0;
  double initial_energy = 0.0;
  std::vector<std::size_t> class_sizes;

  double mean_spacing = 0.0;  ///< D at the spectrum center
  double gamma_golden_rule = 0.0;
  double delta_e = 0.0;
  double sigma = 0.0;
  double band_center = 0.0;
  bool band_from_fit = false;
  double n_pc_ratio = 0.0;
  double n_pc_ipr = 0.0;

  std::optional<BreitWignerFit> bw_fit;
  std::optional<HybridFit> hybrid_fit;
  FitSummary bw_status;
  FitSummary hybrid_status;

  double decay_prefactor = 0.0;    ///< C in W0 = C exp(-Gamma t); NaN if unavailable
  double w0_long_time = 0.0;       ///< phase-averaged W0
  double w0_saturation_model = 0.0;  ///< 3 / N_pc (IPR)
  double w1_half_rise_time = 0.0;  ///< first t with W1 >= max(W1) / 2
  double occupation_long_time_deviation = 0.0;  ///< max_alpha |<n_alpha>_t - n_alpha(inf)|

  std::vector<double> initial_occupations;
  std::vector<double> asymptotic_occupations;
  std::optional<FermiDiracFit> fermi_dirac;

  PredictionError eq14_exact_w0;
  std::optional<PredictionError> eq14_model_w0;
  std::string model_w0_kind;  ///< "bw" or "gauss"

  std::vector<std::string> warnings;  ///< degraded estimates (small systems, etc.)
  std::vector<FileRecord> files;

  std::string to_json() const;
};

/// Pipeline failure. `stage` names the step; `files` lists outputs written so far.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what, std::vector<std::string> files,
             int exit_code);
  const std::string& stage() const noexcept { return stage_; }
  const std::vector<std::string>& files() const noexcept { return files_; }
  int exit_code() const noexcept { return exit_code_; }

 private:
  std::string stage_;
  std::vector<std::string> files_;
  int exit_code_;
};

/// Runs the whole pipeline and writes every export plus manifest.json into
/// config.output.directory (created if missing).
RunManifest run(const ExperimentConfig& config);

/// Time at which a series first reaches half its maximum (linear interpolation).
double half_rise_time(const TimeGrid& grid, const Eigen::VectorXd& series);

}  // namespace tbri
