#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "hyperend/io/commands.hpp"

using namespace hyperend;

namespace {

struct Flags {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<int> resolution;
  bool dualize = false;
};

void add_flags(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "run configuration (JSON)")->required();
  sub->add_option("--out", f.out, "output directory, overrides out_dir");
  sub->add_option("--seed", f.seed, "random seed, overrides seed");
  sub->add_option("--tol", f.tol, "primary tolerance of the command");
  sub->add_option("--resolution", f.resolution,
                  "samples per unit length and per cone-chart direction (sets h_grid = 1/N, n_r = n_alpha = N)");
  sub->add_flag("--dualize", f.dualize, "add de Sitter columns to foliate");
}

io::RunConfig effective_config(const std::string& command, const Flags& f) {
  io::RunConfig cfg = io::load_config(f.config);
  if (!cfg.command.empty() && cfg.command != command) {
    throw Error(ErrorKind::out_of_domain, "cli_io", "config is for '" + cfg.command + "', not '" + command + "'");
  }
  cfg.command = command;
  if (f.out) cfg.out_dir = *f.out;
  if (f.seed) cfg.seed = *f.seed;
  if (f.tol) cfg.tolerances[io::tolerance_keys(command).front()] = *f.tol;
  if (f.resolution) {
    cfg.resolution.h_grid = 1.0 / *f.resolution;
    cfg.resolution.n_r = cfg.resolution.n_alpha = *f.resolution;
  }
  if (f.dualize) {
    if (command != "foliate") throw Error(ErrorKind::out_of_domain, "cli_io", "--dualize applies to foliate only");
    cfg.parameters["dualize"] = true;
  }
  io::validate(cfg);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hyperbolic ends with particles: data at infinity, K-surface foliations, grafting and Schwarzians"};
  app.require_subcommand(1);
  Flags flags;
  const std::vector<std::pair<std::string, std::string>> subs{
      {"build-end", "equidistant family from data at infinity, with condition (*) and Gauss/Codazzi tables"},
      {"foliate", "constant-curvature leaves for a curvature grid"},
      {"dualize", "surfaces of curvature K and their duals from a normalized pair"},
      {"graft", "grafted holonomy of a measured multicurve"},
      {"schwarzian", "Schwarzian derivative of a germ and its cone expansion"},
      {"verify", "normalized-pair checks"},
  };
  for (const auto& [name, help] : subs) add_flags(app.add_subcommand(name, help), flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const io::RunConfig cfg = effective_config(command, flags);
    io::ArtifactWriter out(cfg.out_dir, io::config_hash(cfg));
    try {
      io::run(cfg, out);
    } catch (...) {
      for (const auto& p : out.written()) std::cout << "wrote " << p << '\n';
      throw;
    }
    for (const auto& p : out.written()) std::cout << "wrote " << p << '\n';
    return 0;
  } catch (const Error& e) {
    std::cerr << "hyperend: " << e.what() << '\n';
    return io::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "hyperend: cli_io.internal: " << e.what() << '\n';
    return 4;
  }
}
