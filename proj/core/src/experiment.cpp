// Copyright 2026 The tbri Authors
// SPDX-License-Identifier: Apache-2.0

#include "tbri/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include "json.hpp"
#include "tbri/fock_basis.hpp"
#include "tbri/spectral.hpp"
#include "tbri/table.hpp"

namespace tbri {

using Json = nlohmann::ordered_json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// ---------------------------------------------------------------- config ---

void reject_unknown(const Json& object, const std::set<std::string>& allowed,
                    const std::string& where) {
  for (const auto& [key, value] : object.items()) {
    if (!allowed.contains(key)) throw ConfigError("unknown key '" + where + key + "'");
  }
}

template <typename T>
void read_field(const Json& object, const char* key, T& target, const std::string& where) {
  if (!object.contains(key)) return;
  try {
    target = object.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("key '" + where + key + "' has the wrong type");
  }
}

OutputFormat parse_format(const std::string& text) {
  if (text == "csv") return OutputFormat::Csv;
  if (text == "json") return OutputFormat::Json;
  throw ConfigError("output format must be csv or json, got '" + text + "'");
}

std::string format_name(OutputFormat format) {
  return format == OutputFormat::Csv ? "csv" : "json";
}

double parse_number(std::string_view text, const char* what) {
  std::string copy(text);
  try {
    std::size_t used = 0;
    const double value = std::stod(copy, &used);
    if (used != copy.size()) throw std::invalid_argument(copy);
    return value;
  } catch (const std::exception&) {
    throw ConfigError(std::string("bad ") + what + " '" + copy + "' in grid spec");
  }
}

std::vector<std::string_view> split_view(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

Json model_json(const ModelParams& p) {
  return Json{{"n", p.n},
              {"m", p.m},
              {"d0", p.d0},
              {"eta", p.eta},
              {"seed", p.seed},
              {"jitter", p.jitter},
              {"single_moves", p.include_single_moves},
              {"diagonal_pairs", p.include_diagonal_pairs}};
}

Json config_json(const ExperimentConfig& c) {
  return Json{{"config_version", kConfigVersion},
              {"model", model_json(c.model)},
              {"initial_state", c.initial_state.to_string()},
              {"grid", c.grid},
              {"analysis",
               {{"fits", c.analysis.fits},
                {"class_populations", c.analysis.class_populations},
                {"fermi_dirac", c.analysis.fermi_dirac},
                {"long_time_samples", c.analysis.long_time_samples}}},
              {"output",
               {{"directory", c.output.directory.string()},
                {"format", format_name(c.output.format)},
                {"hamiltonian_binary", c.output.hamiltonian_binary},
                {"decomposition_binary", c.output.decomposition_binary}}}};
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

// --------------------------------------------------------------- exports ---

std::vector<std::string> provenance_comments(const OutputMeta& meta) {
  return {"tbri config_sha256=" + meta.config_hash + " seed=" + std::to_string(meta.seed)};
}

std::string table_text(const Table& table, OutputFormat format) {
  return format == OutputFormat::Csv ? to_csv(table) : to_json(table);
}

std::string extension(OutputFormat format) { return format == OutputFormat::Csv ? ".csv" : ".json"; }

/// Writes files and remembers their names for the manifest and for StageError.
class OutputWriter {
 public:
  explicit OutputWriter(std::filesystem::path dir) : dir_(std::move(dir)) {}

  void write(const std::string& name, const std::string& content) {
    write_text(dir_ / name, content);
    names_.push_back(name);
  }
  void record(const std::string& name) { names_.push_back(name); }

  const std::vector<std::string>& names() const noexcept { return names_; }

  std::vector<FileRecord> inventory() const {
    std::vector<FileRecord> out;
    for (const std::string& name : names_) {
      const std::string bytes = read_text(dir_ / name);
      out.push_back({name, sha256_hex(bytes), bytes.size()});
    }
    return out;
  }

 private:
  std::filesystem::path dir_;
  std::vector<std::string> names_;
};

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const ParameterError*>(&e)) return 2;
  if (dynamic_cast<const NumericalError*>(&e)) return 3;
  if (dynamic_cast<const PreconditionError*>(&e)) return 3;
  return 1;
}

/// Window half-width spanning the 50 central levels (or the whole spectrum,
/// when there are fewer levels or the central ones are degenerate).
double central_window(const Eigen::VectorXd& energies) {
  const auto n = energies.size();
  if (n >= 51) {
    const double central = 0.5 * (energies[n / 2 + 25] - energies[n / 2 - 25]);
    if (central > 0.0) return central * (1.0 + 1e-9);
  }
  return 0.5 * (energies[n - 1] - energies[0]) * (1.0 + 1e-9) + 1e-12;
}

std::vector<double> bits_of(FockState state, int m) {
  std::vector<double> out(static_cast<std::size_t>(m));
  for (int a = 0; a < m; ++a) out[static_cast<std::size_t>(a)] = state.occupied(a) ? 1.0 : 0.0;
  return out;
}

}  // namespace

// ------------------------------------------------------------------ rules ---

InitialStateRule InitialStateRule::parse(std::string_view text) {
  InitialStateRule rule;
  if (text == "mid-spectrum") return rule;
  rule.kind = Kind::Explicit;
  int base = 10;
  std::string_view digits = text;
  if (text.starts_with("0b") || text.starts_with("0B")) {
    base = 2;
    digits = text.substr(2);
  } else if (text.starts_with("0x") || text.starts_with("0X")) {
    base = 16;
    digits = text.substr(2);
  }
  const auto* end = digits.data() + digits.size();
  const auto [ptr, ec] = std::from_chars(digits.data(), end, rule.bitmask, base);
  if (digits.empty() || ec != std::errc{} || ptr != end) {
    throw ConfigError("initial_state must be 'mid-spectrum' or a bitmask, got '" +
                      std::string(text) + "'");
  }
  return rule;
}

std::string InitialStateRule::to_string() const {
  if (kind == Kind::MidSpectrum) return "mid-spectrum";
  std::string bits;
  Bitmask rest = bitmask;
  do {
    bits.insert(bits.begin(), static_cast<char>('0' + (rest & 1U)));
    rest >>= 1;
  } while (rest != 0);
  return "0b" + bits;
}

ExperimentConfig ExperimentConfig::preset_fig1() {
  ExperimentConfig c;
  c.model.n = 6;
  c.model.m = 12;
  c.model.d0 = 1.0;
  c.model.eta = 0.003;
  return c;
}

ExperimentConfig ExperimentConfig::preset_fig2() {
  ExperimentConfig c = preset_fig1();
  c.model.eta = 0.083;
  return c;
}

ExperimentConfig parse_config(std::string_view json_text) {
  Json doc;
  try {
    doc = Json::parse(json_text.begin(), json_text.end());
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  if (doc.contains("manifest_version") && doc.contains("config")) doc = doc.at("config");

  reject_unknown(doc, {"config_version", "model", "initial_state", "grid", "analysis", "output"},
                 "");
  int version = kConfigVersion;
  read_field(doc, "config_version", version, "");
  if (version != kConfigVersion) {
    throw ConfigError("unsupported config_version " + std::to_string(version));
  }

  ExperimentConfig c;
  if (doc.contains("model")) {
    const Json& model = doc.at("model");
    if (!model.is_object()) throw ConfigError("'model' must be an object");
    reject_unknown(model,
                   {"n", "m", "d0", "eta", "seed", "jitter", "single_moves", "diagonal_pairs"},
                   "model.");
    read_field(model, "n", c.model.n, "model.");
    read_field(model, "m", c.model.m, "model.");
    read_field(model, "d0", c.model.d0, "model.");
    read_field(model, "eta", c.model.eta, "model.");
    read_field(model, "seed", c.model.seed, "model.");
    read_field(model, "jitter", c.model.jitter, "model.");
    read_field(model, "single_moves", c.model.include_single_moves, "model.");
    read_field(model, "diagonal_pairs", c.model.include_diagonal_pairs, "model.");
  }
  if (doc.contains("initial_state")) {
    const Json& rule = doc.at("initial_state");
    if (rule.is_string()) {
      c.initial_state = InitialStateRule::parse(rule.get<std::string>());
    } else if (rule.is_number_unsigned()) {
      c.initial_state.kind = InitialStateRule::Kind::Explicit;
      c.initial_state.bitmask = rule.get<Bitmask>();
    } else {
      throw ConfigError("'initial_state' must be a string or a non-negative integer");
    }
  }
  read_field(doc, "grid", c.grid, "");
  if (doc.contains("analysis")) {
    const Json& a = doc.at("analysis");
    if (!a.is_object()) throw ConfigError("'analysis' must be an object");
    reject_unknown(a, {"fits", "class_populations", "fermi_dirac", "long_time_samples"},
                   "analysis.");
    read_field(a, "fits", c.analysis.fits, "analysis.");
    read_field(a, "class_populations", c.analysis.class_populations, "analysis.");
    read_field(a, "fermi_dirac", c.analysis.fermi_dirac, "analysis.");
    read_field(a, "long_time_samples", c.analysis.long_time_samples, "analysis.");
  }
  if (doc.contains("output")) {
    const Json& o = doc.at("output");
    if (!o.is_object()) throw ConfigError("'output' must be an object");
    reject_unknown(o, {"directory", "format", "hamiltonian_binary", "decomposition_binary"},
                   "output.");
    std::string dir = c.output.directory.string();
    std::string format = format_name(c.output.format);
    read_field(o, "directory", dir, "output.");
    read_field(o, "format", format, "output.");
    read_field(o, "hamiltonian_binary", c.output.hamiltonian_binary, "output.");
    read_field(o, "decomposition_binary", c.output.decomposition_binary, "output.");
    c.output.directory = dir;
    c.output.format = parse_format(format);
  }

  try {
    c.model.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  validate_grid_spec(c.grid);
  if (c.analysis.long_time_samples == 0) {
    throw ConfigError("analysis.long_time_samples must be positive");
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  return parse_config(text);
}

std::string serialize_config(const ExperimentConfig& config) {
  return config_json(config).dump(2) + "\n";
}

std::string config_hash(const ExperimentConfig& config) {
  // The output directory is where results go, not what they are.
  ExperimentConfig identity = config;
  identity.output.directory = "";
  return sha256_hex(config_json(identity).dump());
}

// ------------------------------------------------------------------- grid ---

TimeGrid parse_grid_spec(std::string_view spec, double delta_e, double gamma, int max_class,
                         double d0) {
  if (spec == "default") return TimeGrid::standard(delta_e, gamma, max_class, d0);
  if (spec == "empty") return TimeGrid{};
  try {
    if (spec.starts_with("list:")) {
      std::vector<double> pts;
      for (std::string_view item : split_view(spec.substr(5), ',')) {
        if (!item.empty()) pts.push_back(parse_number(item, "time"));
      }
      return TimeGrid(std::move(pts));
    }
    const auto parts = split_view(spec, ':');
    if (parts.size() == 4 && (parts[0] == "linear" || parts[0] == "log")) {
      const double t0 = parse_number(parts[1], "start time");
      const double t1 = parse_number(parts[2], "end time");
      const double count = parse_number(parts[3], "point count");
      if (!(count >= 0.0) || count != std::floor(count)) {
        throw ConfigError("grid point count must be a non-negative integer");
      }
      const auto n = static_cast<std::size_t>(count);
      return parts[0] == "linear" ? TimeGrid::linear(t0, t1, n) : TimeGrid::logarithmic(t0, t1, n);
    }
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("grid '") + std::string(spec) + "': " + e.what());
  }
  throw ConfigError("unrecognised grid spec '" + std::string(spec) + "'");
}

void validate_grid_spec(std::string_view spec) { parse_grid_spec(spec, 1.0, 1.0, 1, 1.0); }

// ------------------------------------------------------- initial state -----

std::size_t select_initial_state(const HamiltonianMatrix& h, const InitialStateRule& rule) {
  const Basis& basis = h.basis();
  if (rule.kind == InitialStateRule::Kind::Explicit) {
    const FockState state{rule.bitmask};
    if (basis.orbitals() < 64 && (rule.bitmask >> basis.orbitals()) != 0) {
      throw ConfigError("initial_state " + rule.to_string() + " uses orbitals beyond m=" +
                        std::to_string(basis.orbitals()));
    }
    if (state.particle_count() != basis.particles()) {
      throw ConfigError("initial_state " + rule.to_string() + " has " +
                        std::to_string(state.particle_count()) + " particles, expected " +
                        std::to_string(basis.particles()));
    }
    return basis.index_of(state);
  }

  const Eigen::VectorXd diag = h.diagonal();
  std::vector<double> sorted(diag.data(), diag.data() + diag.size());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const double median = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  std::size_t best = 0;
  double best_distance = std::numeric_limits<double>::infinity();
  for (std::size_t f = 0; f < n; ++f) {
    const double distance = std::abs(diag[static_cast<Eigen::Index>(f)] - median);
    if (distance < best_distance) {
      best_distance = distance;
      best = f;
    }
  }
  return best;
}

// ----------------------------------------------------------------- tables ---

Table trajectory_table(const OccupationTrajectory& trajectory, const OutputMeta& meta) {
  Table table;
  table.comments = provenance_comments(meta);
  const auto m = trajectory.occupations.rows();
  const auto classes = trajectory.class_population.rows();
  table.comments.push_back("columns: t, n_alpha(t) for alpha = 0..m-1, W0 (survival), "
                           "W_s(t) for cascade classes s = 1..n_c");
  table.columns.push_back("t");
  for (Eigen::Index a = 0; a < m; ++a) table.columns.push_back("n_" + std::to_string(a));
  table.columns.push_back("W0");
  for (Eigen::Index s = 1; s < classes; ++s) table.columns.push_back("W_" + std::to_string(s));

  for (std::size_t t = 0; t < trajectory.grid.size(); ++t) {
    const auto ti = static_cast<Eigen::Index>(t);
    std::vector<Cell> row;
    row.emplace_back(trajectory.grid[t]);
    for (Eigen::Index a = 0; a < m; ++a) row.emplace_back(trajectory.occupations(a, ti));
    row.emplace_back(trajectory.survival[t]);
    for (Eigen::Index s = 1; s < classes; ++s) row.emplace_back(trajectory.class_population(s, ti));
    table.rows.push_back(std::move(row));
  }
  return table;
}

Table prediction_table(const OccupationTrajectory& trajectory,
                       const std::vector<ThermalizationPrediction>& predictions,
                       const OutputMeta& meta) {
  Table base = trajectory_table(trajectory, meta);
  Table table;
  table.comments = base.comments;
  table.comments.push_back(
      "provenance: exact = exact dynamics; eq14-exactW0 = relaxation formula with exact W0; "
      "eq14-modelW0 = relaxation formula with a model W0 (see sidecar)");
  table.columns.push_back("provenance");
  table.columns.insert(table.columns.end(), base.columns.begin(), base.columns.end());

  for (auto& row : base.rows) {
    row.insert(row.begin(), Cell{std::string("exact")});
    table.rows.push_back(std::move(row));
  }
  const auto classes = trajectory.class_population.rows();
  for (const ThermalizationPrediction& pred : predictions) {
    const std::string label =
        pred.source == SurvivalSource::Exact ? "eq14-exactW0" : "eq14-modelW0";
    for (std::size_t t = 0; t < pred.grid.size(); ++t) {
      const auto ti = static_cast<Eigen::Index>(t);
      std::vector<Cell> row;
      row.emplace_back(label);
      row.emplace_back(pred.grid[t]);
      for (Eigen::Index a = 0; a < pred.occupations.rows(); ++a) {
        row.emplace_back(pred.occupations(a, ti));
      }
      // W0 is recoverable from any orbital with n0 != ninf; report the exact series
      // only on exact rows.
      row.emplace_back(kNaN);
      for (Eigen::Index s = 1; s < classes; ++s) row.emplace_back(kNaN);
      table.rows.push_back(std::move(row));
    }
  }
  return table;
}

Table profile_table(const StrengthProfile& profile, const OutputMeta& meta) {
  Table table;
  table.comments = provenance_comments(meta);
  table.comments.push_back("strength function of basis state " + std::to_string(profile.initial) +
                           ": w_k = |C_i^(k)|^2 at eigenvalue E_k");
  table.columns = {"k", "E_k", "w_k"};
  for (Eigen::Index k = 0; k < profile.energies.size(); ++k) {
    table.rows.push_back({static_cast<double>(k), profile.energies[k], profile.weights[k]});
  }
  return table;
}

Table plotdata_table(const OccupationTrajectory& trajectory,
                     const ThermalizationPrediction& prediction,
                     const std::optional<SurvivalModels>& models, const OutputMeta& meta) {
  if (trajectory.grid.points() != prediction.grid.points()) {
    throw PreconditionError("emit_plotdata: trajectory and prediction grids differ");
  }
  Table table;
  table.comments = provenance_comments(meta);
  table.comments.push_back("t: time (hbar = 1, units of 1/d0)");
  table.comments.push_back("n_exact_a: exact occupation of orbital a; n_pred_a: relaxation "
                           "formula n(0) W0 + n(inf) (1 - W0) with exact W0");
  table.comments.push_back("W0_exact: survival probability; W0_bw = exp(-Gamma t); "
                           "W0_gauss = exp(-Delta_E^2 t^2); W0_sat = 3/N_pc; *_floored = "
                           "max(model, 3/N_pc); nan when the model is undefined");
  table.comments.push_back("W_s: population of cascade class s (s = 0..n_c)");

  const auto m = trajectory.occupations.rows();
  const auto classes = trajectory.class_population.rows();
  table.columns.push_back("t");
  for (Eigen::Index a = 0; a < m; ++a) table.columns.push_back("n_exact_" + std::to_string(a));
  for (Eigen::Index a = 0; a < m; ++a) table.columns.push_back("n_pred_" + std::to_string(a));
  for (const char* c : {"W0_exact", "W0_bw", "W0_gauss", "W0_sat", "W0_bw_floored",
                        "W0_gauss_floored"}) {
    table.columns.emplace_back(c);
  }
  for (Eigen::Index s = 0; s < classes; ++s) table.columns.push_back("W_" + std::to_string(s));

  for (std::size_t t = 0; t < trajectory.grid.size(); ++t) {
    const auto ti = static_cast<Eigen::Index>(t);
    std::vector<Cell> row;
    row.emplace_back(trajectory.grid[t]);
    for (Eigen::Index a = 0; a < m; ++a) row.emplace_back(trajectory.occupations(a, ti));
    for (Eigen::Index a = 0; a < m; ++a) row.emplace_back(prediction.occupations(a, ti));
    row.emplace_back(trajectory.survival[t]);
    if (models) {
      row.emplace_back(models->breit_wigner[t]);
      row.emplace_back(models->gaussian[t]);
      row.emplace_back(models->saturation);
      row.emplace_back(models->breit_wigner_floored[t]);
      row.emplace_back(models->gaussian_floored[t]);
    } else {
      for (int k = 0; k < 5; ++k) row.emplace_back(kNaN);
    }
    for (Eigen::Index s = 0; s < classes; ++s) row.emplace_back(trajectory.class_population(s, ti));
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::vector<std::string> emit_plotdata(const OccupationTrajectory& trajectory,
                                       const ThermalizationPrediction& prediction,
                                       const std::optional<SurvivalModels>& models,
                                       const OutputMeta& meta,
                                       const std::filesystem::path& outdir,
                                       OutputFormat format) {
  const Table table = plotdata_table(trajectory, prediction, models, meta);
  std::error_code ec;
  std::filesystem::create_directories(outdir, ec);
  if (ec) throw IoError("cannot create " + outdir.string() + ": " + ec.message());
  const std::string name = "plotdata" + extension(format);
  write_text(outdir / name, table_text(table, format));
  return {name};
}

// --------------------------------------------------------------- manifest ---

std::string RunManifest::to_json() const {
  Json doc;
  doc["manifest_version"] = kManifestVersion;
  doc["config_hash"] = config_hash;
  doc["seed"] = seed;
  doc["config"] = config_json(config);

  Json derived;
  derived["basis_size"] = basis_size;
  derived["initial_index"] = initial_index;
  derived["initial_state"] = InitialStateRule{InitialStateRule::Kind::Explicit, initial_state}.to_string();
  derived["initial_energy"] = initial_energy;
  derived["class_sizes"] = class_sizes;
  derived["mean_spacing_D"] = mean_spacing;
  derived["gamma_golden_rule"] = gamma_golden_rule;
  derived["delta_E"] = delta_e;
  derived["sigma"] = sigma;
  derived["band_center"] = band_center;
  derived["band_from_fit"] = band_from_fit;
  derived["n_pc_ratio"] = n_pc_ratio;
  derived["n_pc_ipr"] = n_pc_ipr;
  derived["decay_prefactor_C"] = number_or_null(decay_prefactor);
  derived["w0_long_time_average"] = w0_long_time;
  derived["w0_saturation_3_over_npc_ipr"] = w0_saturation_model;
  derived["w1_half_rise_time"] = number_or_null(w1_half_rise_time);
  derived["occupation_long_time_deviation"] = occupation_long_time_deviation;
  derived["initial_occupations"] = initial_occupations;
  derived["asymptotic_occupations"] = asymptotic_occupations;
  doc["derived"] = derived;

  Json fits;
  fits["breit_wigner"] = {{"status", bw_status.status}, {"detail", bw_status.detail}};
  if (bw_fit) {
    fits["breit_wigner"]["gamma"] = bw_fit->gamma;
    fits["breit_wigner"]["center"] = bw_fit->center;
    fits["breit_wigner"]["residual"] = bw_fit->residual;
  }
  fits["hybrid"] = {{"status", hybrid_status.status}, {"detail", hybrid_status.detail}};
  if (hybrid_fit) {
    fits["hybrid"]["B_fitted"] = hybrid_fit->b_fitted;
    fits["hybrid"]["B_derived"] = hybrid_fit->b_derived;
    fits["hybrid"]["E_c"] = hybrid_fit->band_center;
    fits["hybrid"]["sigma"] = hybrid_fit->sigma;
    fits["hybrid"]["gamma"] = hybrid_fit->gamma;
    fits["hybrid"]["residual"] = hybrid_fit->residual;
    fits["hybrid"]["F_at_initial"] = hybrid_fit->f_at_initial;
  }
  doc["fits"] = fits;

  if (fermi_dirac) {
    doc["fermi_dirac"] = {
        {"definition", "constrained least squares over 1/T, mu fixed by particle number"},
        {"infinite_temperature", fermi_dirac->infinite_temperature},
        {"temperature", number_or_null(fermi_dirac->temperature)},
        {"chemical_potential", number_or_null(fermi_dirac->chemical_potential)},
        {"residual", fermi_dirac->residual}};
  }

  Json eq14;
  eq14["exact_w0"] = {{"rms", eq14_exact_w0.rms}, {"max", eq14_exact_w0.max}};
  if (eq14_model_w0) {
    eq14["model_w0"] = {
        {"model", model_w0_kind}, {"rms", eq14_model_w0->rms}, {"max", eq14_model_w0->max}};
  }
  doc["relaxation_formula_error"] = eq14;

  doc["warnings"] = warnings;

  Json inventory = Json::array();
  for (const FileRecord& f : files) {
    inventory.push_back({{"name", f.name}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  }
  doc["files"] = inventory;
  return doc.dump(2) + "\n";
}

StageError::StageError(std::string stage, const std::string& what, std::vector<std::string> files,
                       int exit_code)
    : Error("stage '" + stage + "' failed: " + what),
      stage_(std::move(stage)),
      files_(std::move(files)),
      exit_code_(exit_code) {}

double half_rise_time(const TimeGrid& grid, const Eigen::VectorXd& series) {
  if (grid.empty() || series.size() != static_cast<Eigen::Index>(grid.size())) return kNaN;
  const double peak = series.maxCoeff();
  if (!(peak > 0.0)) return kNaN;
  const double half = 0.5 * peak;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double v = series[static_cast<Eigen::Index>(k)];
    if (v >= half) {
      if (k == 0) return grid[0];
      const double prev = series[static_cast<Eigen::Index>(k - 1)];
      const double frac = (half - prev) / (v - prev);
      return grid[k - 1] + frac * (grid[k] - grid[k - 1]);
    }
  }
  return kNaN;
}

// -------------------------------------------------------------------- run ---

RunManifest run(const ExperimentConfig& config) {
  RunManifest manifest;
  manifest.config = config;
  manifest.config_hash = config_hash(config);
  manifest.seed = config.model.seed;

  const std::filesystem::path dir = config.output.directory;
  OutputWriter out(dir);
  std::string stage = "config";

  const OutputMeta meta{manifest.config_hash, config.model.seed, serialize_config(config)};
  const OutputFormat format = config.output.format;

  try {
    config.model.validate();
    validate_grid_spec(config.grid);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
    out.write("config.json", meta.config_json);

    stage = "basis";
    auto basis = std::make_shared<const Basis>(Basis::build(config.model.n, config.model.m));
    manifest.basis_size = basis->size();

    stage = "hamiltonian";
    const SingleParticleSpectrum spectrum = sample_spectrum(config.model);
    const HamiltonianMatrix h =
        build_hamiltonian(basis, spectrum, sample_two_body(config.model),
                          {config.model.include_single_moves, config.model.include_diagonal_pairs});
    if (config.output.hamiltonian_binary) {
      write_hamiltonian(dir / "hamiltonian.bin", h, config.model);
      out.record("hamiltonian.bin");
    }

    stage = "initial-state";
    const std::size_t i = select_initial_state(h, config.initial_state);
    manifest.initial_index = i;
    manifest.initial_state = (*basis)[i].occupancy;
    manifest.initial_energy = h(i, i);
    const ClassPartition partition = classify(*basis, (*basis)[i]);
    manifest.class_sizes = partition.sizes();

    stage = "diagonalization";
    const EigenDecomposition decomp = diagonalize(h);
    if (config.output.decomposition_binary) {
      write_decomposition(dir / "decomposition.bin", decomp, config.model);
      out.record("decomposition.bin");
    }
    const SpectralStats stats = [&] {
      try {
        if (decomp.size() < 3) throw InsufficientStatistics("fewer than 3 levels", static_cast<double>(decomp.size()));
        return spectral_stats(decomp, central_window(decomp.energies));
      } catch (const InsufficientStatistics& e) {
        // Too few levels for a local estimate: use the global spacing.
        manifest.warnings.push_back(e.what());
        const Eigen::VectorXd& en = decomp.energies;
        const auto n = en.size();
        const double spacing = n > 1 ? (en[n - 1] - en[0]) / static_cast<double>(n - 1) : 0.0;
        const double median = n % 2 ? en[n / 2] : 0.5 * (en[n / 2 - 1] + en[n / 2]);
        return SpectralStats(en, 3.0 * std::max(spacing, 1e-12), spacing, median);
      }
    }();
    manifest.mean_spacing = stats.mean_spacing_mid();

    stage = "strength";
    const StrengthProfile profile = strength_function(decomp, h, i);
    GoldenRule golden;
    try {
      if (partition.sizes().size() < 2 || partition.sizes()[1] == 0) {
        manifest.warnings.push_back("no states are coupled to the initial state; Gamma = 0");
      } else {
        golden = golden_rule(h, partition, i);
      }
    } catch (const InsufficientStatistics& e) {
      manifest.warnings.push_back(e.what());
    }
    manifest.gamma_golden_rule = golden.gamma;
    manifest.delta_e = energy_variance(h, i);

    if (config.analysis.fits) {
      const auto attempt = [&](FitSummary& status, auto&& fit) {
        try {
          fit();
          status.status = "ok";
        } catch (const PreconditionError& e) {
          status.status = "skipped";
          status.detail = e.what();
        } catch (const InsufficientStatistics& e) {
          status.status = "skipped";
          status.detail = e.what();
        } catch (const FitError& e) {
          // A failed fit is reported, not fatal: nothing downstream needs it.
          status.status = "failed";
          status.detail = e.what();
        }
      };
      const std::optional<double> gamma_guess =
          golden.gamma > 0.0 ? std::optional<double>(golden.gamma) : std::nullopt;
      attempt(manifest.bw_status, [&] { manifest.bw_fit = fit_bw(profile, gamma_guess); });
      attempt(manifest.hybrid_status, [&] {
        manifest.hybrid_fit =
            fit_hybrid(profile, stats,
                       HybridGuess{gamma_guess, manifest.delta_e > 0.0
                                                    ? std::optional<double>(manifest.delta_e)
                                                    : std::nullopt,
                                   profile.first_moment()});
      });
    } else {
      manifest.bw_status.detail = manifest.hybrid_status.detail = "disabled in config";
    }
    const SpreadingParams spreading =
        spreading_params(h, profile, golden, stats, manifest.hybrid_fit);
    manifest.sigma = spreading.sigma;
    manifest.band_center = spreading.band_center;
    manifest.band_from_fit = spreading.band_from_fit;
    manifest.n_pc_ratio = spreading.n_pc_ratio;
    manifest.n_pc_ipr = spreading.n_pc_ipr;

    out.write("strength_profile" + extension(format), table_text(profile_table(profile, meta), format));
    {
      Json sidecar{{"config_hash", meta.config_hash},
                   {"seed", meta.seed},
                   {"initial_index", i},
                   {"E_i", profile.unperturbed_energy},
                   {"gamma_gr", spreading.gamma_gr},
                   {"delta_E", spreading.delta_e},
                   {"sigma", spreading.sigma},
                   {"E_c", spreading.band_center},
                   {"band_from_fit", spreading.band_from_fit},
                   {"n_pc_ratio", spreading.n_pc_ratio},
                   {"n_pc_ipr", spreading.n_pc_ipr}};
      out.write("strength_params.json", sidecar.dump(2) + "\n");
    }

    stage = "dynamics";
    const TimeGrid grid = parse_grid_spec(config.grid, manifest.delta_e, golden.gamma,
                                          partition.max_class, config.model.d0);
    const OccupationTrajectory traj = simulate(decomp, *basis, partition, i, grid);
    manifest.initial_occupations = bits_of((*basis)[i], basis->orbitals());
    manifest.asymptotic_occupations = asymptotic_occupations(decomp, i, *basis);
    manifest.w0_saturation_model = 3.0 / spreading.n_pc_ipr;
    if (config.analysis.class_populations && traj.class_population.rows() > 1) {
      manifest.w1_half_rise_time = half_rise_time(grid, traj.class_population.row(1).transpose());
    } else {
      manifest.w1_half_rise_time = kNaN;
    }
    manifest.decay_prefactor =
        fit_decay_prefactor(grid, traj.survival, golden.gamma, manifest.w0_saturation_model);

    if (stats.mean_spacing_mid() > 0.0) {
      const TimeGrid late = TimeGrid::long_time(stats.mean_spacing_mid(),
                                                config.analysis.long_time_samples);
      const std::vector<double> w0_late = survival_probability(decomp, i, late);
      manifest.w0_long_time =
          std::accumulate(w0_late.begin(), w0_late.end(), 0.0) / static_cast<double>(w0_late.size());
      const Eigen::MatrixXd n_late = occupation_numbers(evolve_amplitudes(decomp, i, late), *basis);
      const Eigen::VectorXd n_avg = n_late.rowwise().mean();
      double deviation = 0.0;
      for (Eigen::Index a = 0; a < n_avg.size(); ++a) {
        deviation = std::max(
            deviation, std::abs(n_avg[a] - manifest.asymptotic_occupations[static_cast<std::size_t>(a)]));
      }
      manifest.occupation_long_time_deviation = deviation;
    }

    Table traj_table = trajectory_table(traj, meta);
    if (!config.analysis.class_populations) {
      // Keep t, n_*, W0 only.
      const std::size_t keep = static_cast<std::size_t>(basis->orbitals()) + 2;
      traj_table.columns.resize(keep);
      for (auto& row : traj_table.rows) row.resize(keep);
    }
    out.write("trajectory" + extension(format), table_text(traj_table, format));

    stage = "theory";
    std::vector<ThermalizationPrediction> predictions;
    predictions.push_back(predict_occupations(manifest.initial_occupations,
                                              manifest.asymptotic_occupations, traj.survival, grid,
                                              SurvivalSource::Exact));
    manifest.eq14_exact_w0 = prediction_error(traj.occupations, predictions.front().occupations);

    std::optional<SurvivalModels> models;
    if (golden.gamma > 0.0 && manifest.delta_e > 0.0) {
      models = survival_models(golden.gamma, manifest.delta_e, spreading.n_pc_ipr, grid);
      // Gaussian decay once the width reaches the band scale, exponential below.
      const bool gaussian = golden.gamma >= spreading.sigma;
      manifest.model_w0_kind = gaussian ? "gauss" : "bw";
      const std::vector<double>& w0_model =
          gaussian ? models->gaussian_floored : models->breit_wigner_floored;
      predictions.push_back(predict_occupations(
          manifest.initial_occupations, manifest.asymptotic_occupations, w0_model, grid,
          gaussian ? SurvivalSource::Gaussian : SurvivalSource::BreitWigner));
      manifest.eq14_model_w0 = prediction_error(traj.occupations, predictions.back().occupations);
    }

    if (config.analysis.fermi_dirac && basis->particles() < basis->orbitals()) {
      manifest.fermi_dirac =
          fit_fermi_dirac(manifest.asymptotic_occupations, spectrum, basis->particles());
    }

    stage = "export";
    out.write("prediction" + extension(format),
              table_text(prediction_table(traj, predictions, meta), format));
    {
      Json sidecar{{"config_hash", meta.config_hash},
                   {"seed", meta.seed},
                   {"model", model_json(config.model)},
                   {"grid", config.grid},
                   {"initial_state", InitialStateRule{InitialStateRule::Kind::Explicit,
                                                      manifest.initial_state}.to_string()},
                   {"model_w0", manifest.model_w0_kind}};
      out.write("trajectory_meta.json", sidecar.dump(2) + "\n");
    }
    for (const std::string& name : emit_plotdata(traj, predictions.front(), models, meta, dir, format)) {
      out.record(name);
    }

    manifest.files = out.inventory();
    write_text(dir / "manifest.json", manifest.to_json());
    return manifest;
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what(), out.names(), exit_code_for(e));
  }
}

}  // namespace tbri
