#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <string>

#include "hyperend/io/json_io.hpp"

namespace hyperend::io {

inline constexpr const char* tool_version = "0.1.0";

struct Resolution {
  double h_grid = 0.03;  // spacing of generated rectangular grids
  int n_r = 24;          // radial samples of generated cone charts
  int n_alpha = 48;      // angular samples of generated cone charts and cone rings
  double dr = 0.5;       // parameter step between family rows
};

struct RunConfig {
  std::string command;
  std::map<std::string, std::string> inputs;
  std::map<std::string, double> tolerances;
  Resolution resolution;
  std::string out_dir = "hyperend_out";
  std::uint64_t seed = 0;
  json parameters = json::object();  // command-specific settings
  std::string base_dir;              // relative inputs resolve against this; not hashed

  double tol(const std::string& key, double fallback) const {
    const auto it = tolerances.find(key);
    return it == tolerances.end() ? fallback : it->second;
  }
  bool has_input(const std::string& key) const { return inputs.count(key) != 0; }
  std::string input(const std::string& key) const {
    const auto it = inputs.find(key);
    if (it == inputs.end()) {
      throw Error(ErrorKind::out_of_domain, "cli_io", command + " needs inputs." + key);
    }
    const std::filesystem::path p(it->second);
    return p.is_absolute() || base_dir.empty() ? it->second : (std::filesystem::path(base_dir) / p).string();
  }
};

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> c{"build-end", "foliate", "dualize", "graft", "schwarzian", "verify"};
  return c;
}

// Tolerance keys understood by each command; the first is the one --tol sets.
inline const std::vector<std::string>& tolerance_keys(const std::string& command) {
  static const std::map<std::string, std::vector<std::string>> keys{
      {"build-end", {"star_trace", "det_bound", "refinement_floor"}},
      {"foliate", {"newton", "gauss_bonnet", "refinement_floor"}},
      {"dualize", {"roundtrip", "refinement_floor"}},
      {"graft", {"relation", "cone", "equivariance"}},
      {"schwarzian", {"kernel", "zero", "scale"}},
      {"verify", {"pullback", "self_adjoint", "determinant", "refinement_floor"}},
  };
  static const std::vector<std::string> none;
  const auto it = keys.find(command);
  return it == keys.end() ? none : it->second;
}

inline json config_json(const RunConfig& c, bool with_out_dir = true) {
  json j;
  j["command"] = c.command;
  j["inputs"] = c.inputs;
  j["tolerances"] = c.tolerances;
  j["resolution"] = {{"h_grid", c.resolution.h_grid},
                     {"n_r", c.resolution.n_r},
                     {"n_alpha", c.resolution.n_alpha},
                     {"dr", c.resolution.dr}};
  if (with_out_dir) j["out_dir"] = c.out_dir;
  j["seed"] = c.seed;
  j["parameters"] = c.parameters;
  return j;
}

inline RunConfig read_config(const Node& n) {
  n.only({"command", "inputs", "tolerances", "resolution", "out_dir", "seed", "parameters"});
  RunConfig c;
  if (n.has("command")) c.command = n["command"].string();
  if (n.has("inputs")) {
    const Node in = n["inputs"];
    if (!in.raw().is_object()) in.fail("expected an object");
    for (const auto& [k, v] : in.raw().items()) c.inputs[k] = in[k].string();
  }
  if (n.has("tolerances")) {
    const Node t = n["tolerances"];
    if (!t.raw().is_object()) t.fail("expected an object");
    for (const auto& [k, v] : t.raw().items()) c.tolerances[k] = t[k].number();
  }
  if (n.has("resolution")) {
    const Node r = n["resolution"];
    r.only({"h_grid", "n_r", "n_alpha", "dr"});
    c.resolution.h_grid = r.number_or("h_grid", c.resolution.h_grid);
    c.resolution.n_r = static_cast<int>(r.integer_or("n_r", c.resolution.n_r));
    c.resolution.n_alpha = static_cast<int>(r.integer_or("n_alpha", c.resolution.n_alpha));
    c.resolution.dr = r.number_or("dr", c.resolution.dr);
  }
  if (n.has("out_dir")) c.out_dir = n["out_dir"].string();
  if (n.has("seed")) {
    const Node s = n["seed"];
    if (!s.raw().is_number_unsigned()) s.fail("expected a non-negative integer");
    c.seed = s.raw().get<std::uint64_t>();
  }
  if (n.has("parameters")) {
    if (!n["parameters"].raw().is_object()) n["parameters"].fail("expected an object");
    c.parameters = n["parameters"].raw();
  }
  return c;
}

inline RunConfig load_config(const std::string& path) {
  const json j = load_json(path);
  RunConfig c = read_config(Node(j, path));
  c.base_dir = std::filesystem::path(path).parent_path().string();
  return c;
}

inline void validate(const RunConfig& c) {
  auto bad = [](const std::string& what) { return Error(ErrorKind::out_of_domain, "cli_io", what); };
  bool known = false;
  for (const auto& k : commands()) known = known || k == c.command;
  if (!known) throw bad("unknown command '" + c.command + "'");
  const auto& keys = tolerance_keys(c.command);
  for (const auto& [k, v] : c.tolerances) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
      std::string list;
      for (const auto& x : keys) list += " " + x;
      throw bad("tolerance '" + k + "' is not used by " + c.command + " (known:" + list + ")");
    }
    if (!(v > 0.0) || !std::isfinite(v)) throw bad("tolerance '" + k + "' must be positive");
  }
  const Resolution& r = c.resolution;
  if (!(r.h_grid > 0.0) || !(r.h_grid <= 0.125)) throw bad("h_grid must lie in (0, 1/8] (8 samples per unit)");
  if (r.n_r < 8 || r.n_alpha < 8) throw bad("n_r and n_alpha must be at least 8");
  if (!(r.dr > 0.0)) throw bad("dr must be positive");
  if (c.out_dir.empty()) throw bad("out_dir must not be empty");
}

// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

// Hash of the canonical config.  The output directory is left out so that
// identical runs into different directories produce identical artifacts.
inline std::string config_hash(const RunConfig& c) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(config_json(c, false).dump())));
  return buf;
}

}  // namespace hyperend::io
