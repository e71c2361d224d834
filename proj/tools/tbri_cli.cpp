// Copyright 2026 The tbri Authors
// SPDX-License-Identifier: Apache-2.0

// tbri: run TBRI thermalization experiments from the command line.
//
//   tbri run --config cfg.json --out results/
//   tbri reproduce-fig2 --seed 7
//   tbri sweep --etas 0.003,0.01,0.083 --out sweep/
//   tbri inspect results/manifest.json
//
// Exit codes: 0 success, 2 configuration error, 3 numerical-stage error,
// 1 anything else (I/O, internal).

#include <cstdio>
#include <filesystem>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tbri/experiment.hpp"
#include "tbri/table.hpp"

namespace {

constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string grid;
  std::string format;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool with_config) {
  if (with_config) {
    cmd->add_option("--config", flags.config_path, "JSON config file (or a manifest.json)")
        ->check(CLI::ExistingFile);
  }
  cmd->add_option("--seed", flags.seed, "RNG seed (overrides the config)");
  cmd->add_option("--out", flags.out, "output directory");
  cmd->add_option("--grid", flags.grid,
                  "time grid: default | linear:T0:T1:N | log:T0:T1:N | list:t0,t1,...");
  cmd->add_option("--format", flags.format, "table format")->check(CLI::IsMember({"csv", "json"}));
}

tbri::ExperimentConfig apply(tbri::ExperimentConfig config, const CommonFlags& flags) {
  if (flags.seed) config.model.seed = *flags.seed;
  if (!flags.out.empty()) config.output.directory = flags.out;
  if (!flags.grid.empty()) {
    tbri::validate_grid_spec(flags.grid);
    config.grid = flags.grid;
  }
  if (!flags.format.empty()) {
    config.output.format = flags.format == "json" ? tbri::OutputFormat::Json : tbri::OutputFormat::Csv;
  }
  return config;
}

void print_summary(const tbri::RunManifest& m) {
  std::printf("output       %s\n", m.config.output.directory.string().c_str());
  std::printf("N            %zu\n", m.basis_size);
  std::printf("initial      %zu (E_i = %.6g)\n", m.initial_index, m.initial_energy);
  std::printf("D            %.6g\n", m.mean_spacing);
  std::printf("Gamma (GR)   %.6g\n", m.gamma_golden_rule);
  std::printf("Delta_E      %.6g\n", m.delta_e);
  std::printf("N_pc         %.6g (Gamma/D)  %.6g (IPR)\n", m.n_pc_ratio, m.n_pc_ipr);
  std::printf("<W0>_t       %.6g (3/N_pc = %.6g)\n", m.w0_long_time, m.w0_saturation_model);
  std::printf("rel. error   rms %.4g  max %.4g (exact W0)\n", m.eq14_exact_w0.rms,
              m.eq14_exact_w0.max);
  std::printf("files        %zu + manifest.json\n", m.files.size());
}

int run_config(const tbri::ExperimentConfig& config) {
  const tbri::RunManifest manifest = tbri::run(config);
  print_summary(manifest);
  return 0;
}

std::vector<double> parse_etas(const std::string& text) {
  std::vector<double> etas;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      const double eta = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      etas.push_back(eta);
    } catch (const std::exception&) {
      throw tbri::ConfigError("bad eta '" + item + "' in --etas");
    }
  }
  if (etas.empty()) throw tbri::ConfigError("--etas needs at least one value");
  return etas;
}

int sweep(tbri::ExperimentConfig base, const std::vector<double>& etas, unsigned jobs) {
  std::vector<tbri::ExperimentConfig> configs;
  for (double eta : etas) {
    tbri::ExperimentConfig c = base;
    c.model.eta = eta;
    c.output.directory = base.output.directory / ("eta-" + tbri::format_double(eta));
    configs.push_back(std::move(c));
  }
  for (const auto& c : configs) {
    try {
      c.model.validate();
    } catch (const tbri::ParameterError& e) {
      throw tbri::ConfigError(e.what());
    }
  }

  // Runs write to disjoint directories, so batches of `jobs` can go in parallel.
  std::vector<tbri::RunManifest> manifests(configs.size());
  for (std::size_t start = 0; start < configs.size(); start += jobs) {
    const std::size_t stop = std::min(configs.size(), start + jobs);
    std::vector<std::future<tbri::RunManifest>> pending;
    for (std::size_t k = start; k < stop; ++k) {
      pending.push_back(std::async(std::launch::async, [&, k] { return tbri::run(configs[k]); }));
    }
    for (std::size_t k = start; k < stop; ++k) manifests[k] = pending[k - start].get();
  }

  std::printf("%-10s %-14s %-14s %-14s %-14s %-12s\n", "eta", "Gamma", "Delta_E", "N_pc(IPR)",
              "<W0>_t", "rms(exact)");
  for (const auto& m : manifests) {
    std::printf("%-10.6g %-14.6g %-14.6g %-14.6g %-14.6g %-12.4g\n", m.config.model.eta,
                m.gamma_golden_rule, m.delta_e, m.n_pc_ipr, m.w0_long_time, m.eq14_exact_w0.rms);
  }
  return 0;
}

int inspect(const std::filesystem::path& target, bool raw) {
  const std::filesystem::path path =
      std::filesystem::is_directory(target) ? target / "manifest.json" : target;
  const std::string text = tbri::read_text(path);
  if (raw) {
    std::cout << text;
    return 0;
  }
  nlohmann::ordered_json doc;
  try {
    doc = nlohmann::ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw tbri::ConfigError(path.string() + " is not valid JSON: " + e.what());
  }
  if (!doc.contains("manifest_version")) {
    throw tbri::ConfigError(path.string() + " is not a tbri manifest");
  }
  std::cout << "config  " << doc["config"].dump() << "\n";
  std::cout << "hash    " << doc["config_hash"].get<std::string>() << "\n";
  for (const auto& [key, value] : doc["derived"].items()) {
    std::printf("  %-32s %s\n", key.c_str(), value.dump().c_str());
  }
  for (const auto& [key, value] : doc["relaxation_formula_error"].items()) {
    std::printf("  error/%-26s %s\n", key.c_str(), value.dump().c_str());
  }
  for (const auto& [key, value] : doc["fits"].items()) {
    std::printf("  fit/%-28s %s\n", key.c_str(), value.dump().c_str());
  }
  std::cout << "files\n";
  for (const auto& f : doc["files"]) {
    std::printf("  %-24s %s %llu\n", f["name"].get<std::string>().c_str(),
                f["sha256"].get<std::string>().c_str(),
                static_cast<unsigned long long>(f["bytes"].get<std::uint64_t>()));
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thermalization of isolated Fermi systems with two-body random interaction"};
  app.require_subcommand(1);

  CommonFlags run_flags, fig1_flags, fig2_flags, sweep_flags;
  auto* run_cmd = app.add_subcommand("run", "run one experiment from a config");
  add_common(run_cmd, run_flags, true);

  auto* fig1 = app.add_subcommand("reproduce-fig1", "weak interaction preset (eta = 0.003)");
  add_common(fig1, fig1_flags, false);
  auto* fig2 = app.add_subcommand("reproduce-fig2", "strong interaction preset (eta = 0.083)");
  add_common(fig2, fig2_flags, false);

  auto* sweep_cmd = app.add_subcommand("sweep", "run one experiment per eta value");
  add_common(sweep_cmd, sweep_flags, true);
  std::string etas_text;
  unsigned jobs = 1;
  sweep_cmd->add_option("--etas", etas_text, "comma-separated eta values")->required();
  sweep_cmd->add_option("--jobs", jobs, "concurrent runs")->check(CLI::Range(1U, 256U));

  auto* inspect_cmd = app.add_subcommand("inspect", "print a run manifest");
  std::string inspect_target;
  bool raw = false;
  inspect_cmd->add_option("path", inspect_target, "manifest.json or an output directory")
      ->required()
      ->check(CLI::ExistingPath);
  inspect_cmd->add_flag("--raw", raw, "print the JSON verbatim");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    const auto base = [](const CommonFlags& flags) {
      return flags.config_path.empty() ? tbri::ExperimentConfig{}
                                       : tbri::load_config(flags.config_path);
    };
    if (*run_cmd) return run_config(apply(base(run_flags), run_flags));
    if (*fig1) {
      auto c = tbri::ExperimentConfig::preset_fig1();
      c.output.directory = "fig1";
      return run_config(apply(c, fig1_flags));
    }
    if (*fig2) {
      auto c = tbri::ExperimentConfig::preset_fig2();
      c.output.directory = "fig2";
      return run_config(apply(c, fig2_flags));
    }
    if (*sweep_cmd) {
      auto c = base(sweep_flags);
      if (sweep_flags.out.empty()) c.output.directory = "sweep";
      return sweep(apply(c, sweep_flags), parse_etas(etas_text), jobs);
    }
    if (*inspect_cmd) return inspect(inspect_target, raw);
  } catch (const tbri::StageError& e) {
    std::fprintf(stderr, "tbri: %s\n", e.what());
    if (!e.files().empty()) {
      std::fprintf(stderr, "tbri: partial outputs:");
      for (const auto& f : e.files()) std::fprintf(stderr, " %s", f.c_str());
      std::fprintf(stderr, "\n");
    }
    return e.exit_code();
  } catch (const tbri::ConfigError& e) {
    std::fprintf(stderr, "tbri: config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "tbri: %s\n", e.what());
    return kExitOther;
  }
  return kExitOther;
}
