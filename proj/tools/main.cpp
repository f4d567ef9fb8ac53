// qcap: configuration-driven runner for the evolution, scattering and inversion pipelines.

#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "qcap/log.hpp"
#include "qcap/parallel.hpp"

int main(int argc, char** argv) {
  CLI::App app{"qcap: nonlocal Schrodinger evolution, scattering and inverse scattering"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::string out_dir = "out";
  std::size_t workers = 0;
  bool verbose = false;
  const std::map<std::string, std::string> about{
      {"evolve", "time evolution with conservation report"},
      {"picard", "Picard iteration: contraction and continuous dependence tables"},
      {"jost", "Jost solutions, classification, r and t"},
      {"scatter", "asymptotic states, scattering map, lambda recovery"},
      {"invert", "Marchenko reconstruction of V0"},
      {"capacitor", "full pipeline: S -> V0 -> capacitor fit -> lambda"},
  };
  for (const auto& name : qcap::cli::subcommands()) {
    auto* sub = app.add_subcommand(name, about.count(name) ? about.at(name) : "");
    sub->add_option("--config", config_path, "JSON experiment config")->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--workers", workers, "worker threads (0: all cores)");
    sub->add_flag("--verbose", verbose, "progress messages on stderr");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  const std::string sub = app.get_subcommands().front()->get_name();
  qcap::log::set_level(verbose ? qcap::log::Level::Info : qcap::log::Level::Warn);
  qcap::set_workers(workers);
  try {
    const qcap::ExperimentConfig cfg = qcap::load_config(config_path);
    qcap::cli::run(sub, cfg, out_dir);
  } catch (const qcap::Error& e) {
    std::cerr << "qcap " << sub << ": " << e.what() << '\n';
    return qcap::cli::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "qcap " << sub << ": " << e.what() << '\n';
    return 4;
  }
  return 0;
}
