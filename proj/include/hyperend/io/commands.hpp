#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "hyperend/end/end_family.hpp"
#include "hyperend/fields/curvature.hpp"
#include "hyperend/fields/normalized_pair.hpp"
#include "hyperend/fixtures/disk_patch.hpp"
#include "hyperend/fixtures/genus2.hpp"
#include "hyperend/fixtures/representations.hpp"
#include "hyperend/foliation/embedding.hpp"
#include "hyperend/foliation/leaf_solver.hpp"
#include "hyperend/grafting/holonomy.hpp"
#include "hyperend/infinity/infinity_data.hpp"
#include "hyperend/io/artifacts.hpp"
#include "hyperend/io/json_io.hpp"
#include "hyperend/io/run_config.hpp"
#include "hyperend/schwarzian/schwarzian.hpp"

namespace hyperend::io {

using end::Side;
using fields::MetricField;
using fields::OperatorField;
using infinity::InfinityData;

// 0 pass, 2 bad input or domain, 3 I/O or parse, 4 invariant violated mid-run.
inline int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::parse_error:
    case ErrorKind::io_error: return 3;
    case ErrorKind::invariant_violation:
    case ErrorKind::non_convergence: return 4;
    default: return 2;
  }
}

inline Error invalid(const std::string& what) { return Error(ErrorKind::out_of_domain, "cli_io", what); }

// Uniform double in [0, 1) from the top 53 bits, identical on every platform.
inline double unit_draw(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Frobenius-norm bound on random SL(2, C) conjugators used by equivariance checks.
inline constexpr double max_conjugator_norm = 4.0;

inline Node parameters(const RunConfig& cfg) { return Node(cfg.parameters, "config", "/parameters"); }

// ---- surfaces ----

struct Surface {
  AtlasPtr atlas;
  std::optional<fields::ConeSignature> signature;
  FieldSet fields;
  std::optional<InfinityData> datum;  // generated datum not built from a differential
};

inline Surface generated_surface(const Node& g, const RunConfig& cfg) {
  Surface s;
  const std::string name = g["name"].string();
  if (name == "genus2") {
    g.only({"name", "datum", "centre_amp", "cone_amp"});
    fixtures::Genus2Options o;
    o.h_centre = o.h_vertex = cfg.resolution.h_grid;
    const fixtures::Genus2Surface surf(o);
    s.atlas = surf.atlas();
    s.signature = fixtures::Genus2Surface::signature();
    const std::string datum = g.string_or("datum", "fuchsian");
    if (datum == "fuchsian") {
      s.fields.metrics.emplace("I*", fixtures::poincare_field(s.atlas));
    } else if (datum == "perturbed") {
      s.datum = surf.perturbed(g.number_or("centre_amp", 0.04), g.number_or("cone_amp", 0.03));
      s.fields.metrics.emplace("I*", s.datum->Istar);
    } else {
      g["datum"].fail("datum must be 'fuchsian' or 'perturbed'");
    }
  } else if (name == "cone") {
    g.only({"name", "theta", "r_min", "r_max"});
    s.atlas = fixtures::cone_chart(g["theta"].number(), g.number_or("r_min", 1e-3), g.number_or("r_max", 1.5),
                                   cfg.resolution.n_r, cfg.resolution.n_alpha);
    s.fields.metrics.emplace("I*", fixtures::cone_metric_field(s.atlas));
  } else {
    g["name"].fail("unknown surface generator '" + name + "' (known: genus2, cone)");
  }
  return s;
}

inline Surface load_surface(const std::string& path, const RunConfig& cfg) {
  const json j = load_json(path);
  const Node n(j, path);
  if (n.has("generator")) {
    n.only({"generator"});
    return generated_surface(n["generator"], cfg);
  }
  n.only({"atlas", "fields", "signature"});
  Surface s;
  s.atlas = read_atlas(n["atlas"]);
  s.fields = read_field_blocks(n["fields"], s.atlas);
  if (n.has("signature")) {
    s.signature = read_signature(n["signature"]);
    s.signature->validate();
  }
  return s;
}

inline const MetricField& metric(const Surface& s, const std::string& role) {
  const auto it = s.fields.metrics.find(role);
  if (it == s.fields.metrics.end()) throw invalid("surface has no metric field with role '" + role + "'");
  return it->second;
}

// I* with II* = 1/2 I* + Re q, an explicit II*, or a generated datum.
inline InfinityData datum_for(const Surface& s, const RunConfig& cfg) {
  const bool has_q = cfg.has_input("quad_diff");
  if (s.datum) {
    if (has_q) throw invalid("a generated perturbed datum takes no quadratic differential");
    return *s.datum;
  }
  const MetricField& I = metric(s, "I*");
  if (s.fields.metrics.count("II*")) {
    if (has_q) throw invalid("give either II* or a quadratic differential, not both");
    return infinity::assemble(I, s.fields.metrics.at("II*"), fields::gauss_curvature(I));
  }
  if (has_q) {
    const std::string path = cfg.input("quad_diff");
    const json j = load_json(path);
    return infinity::data_from_qd(I, read_quad_diff(Node(j, path), s.atlas));
  }
  return infinity::data_from_qd(
      I, infinity::make_quad_diff(s.atlas, [](std::complex<double>, const Chart&) { return std::complex<double>(0.0); }));
}

struct Pair {
  MetricField h, hp;
  OperatorField b;
};

// (h, h', b) from roles "h", "h'", "b"; missing entries default to I*, h and the identity.
inline Pair pair_for(const Surface& s) {
  const MetricField h = s.fields.metrics.count("h") ? metric(s, "h") : metric(s, "I*");
  const MetricField hp = s.fields.metrics.count("h'") ? metric(s, "h'") : h;
  const auto it = s.fields.operators.find("b");
  OperatorField b = it != s.fields.operators.end() ? it->second : OperatorField(s.atlas, "b", Mat2::Identity());
  return {h, hp, std::move(b)};
}

inline Side read_side(const Node& p) {
  const std::string side = p.string_or("side", "hyperbolic");
  if (side == "hyperbolic") return Side::hyperbolic;
  if (side == "de_sitter") return Side::de_sitter;
  p["side"].fail("side must be 'hyperbolic' or 'de_sitter'");
}

// Explicit list under "curvatures" or {"min", "max", "count", "spacing"} under "k_grid".
inline std::vector<double> curvature_grid(const Node& p) {
  if (p.has("curvatures") == p.has("k_grid")) throw invalid("give exactly one of parameters.curvatures and parameters.k_grid");
  if (p.has("curvatures")) return p["curvatures"].numbers();
  const Node g = p["k_grid"];
  g.only({"min", "max", "count", "spacing"});
  const double lo = g["min"].number(), hi = g["max"].number();
  const long n = g["count"].integer();
  const std::string spacing = g.string_or("spacing", "log");
  if (n < 2) throw invalid("k_grid.count must be at least 2");
  if (!(lo < hi)) throw invalid("k_grid needs min < max");
  std::vector<double> Ks;
  if (spacing == "log") {
    if (!(hi < 0.0)) throw invalid("log-spaced k_grid needs negative curvatures");
    for (long k = 0; k < n; ++k) {
      const double t = static_cast<double>(k) / (n - 1);
      Ks.push_back(-std::exp((1.0 - t) * std::log(-lo) + t * std::log(-hi)));
    }
  } else if (spacing == "linear") {
    for (long k = 0; k < n; ++k) Ks.push_back(lo + (hi - lo) * k / (n - 1));
  } else {
    g["spacing"].fail("spacing must be 'log' or 'linear'");
  }
  return Ks;
}

struct SampleStats {
  double min = std::numeric_limits<double>::infinity();
  double max = -std::numeric_limits<double>::infinity();
  double sum = 0.0, weight = 0.0;
  void add(double v, double w = 1.0) {
    min = std::min(min, v);
    max = std::max(max, v);
    sum += w * v;
    weight += w;
  }
  double mean() const { return weight > 0.0 ? sum / weight : 0.0; }
};

inline std::string failed_items(const Report& r) {
  std::string s;
  for (const auto& it : r.items) {
    if (!it.pass) s += (s.empty() ? "" : ", ") + it.name + " = " + num(it.value);
  }
  return s;
}

// ---- build-end ----

inline void cmd_build_end(const RunConfig& cfg, ArtifactWriter& out) {
  const Node p = parameters(cfg);
  p.only({"side", "steps"});
  const Side side = read_side(p);
  const long steps = p.integer_or("steps", 8);
  if (steps < 0) throw invalid("parameters.steps must be nonnegative");
  const Surface s = load_surface(cfg.input("surface"), cfg);
  const InfinityData d = datum_for(s, cfg);
  const infinity::StarTolerances tol{cfg.tol("star_trace", 1e-8), cfg.tol("det_bound", 1e6),
                                     cfg.tol("refinement_floor", 1e-10)};
  const Report star = infinity::condition_star_report(d, tol);
  out.json_doc("star_report.json", {{"command", "build-end"}, {"report", report_json(star)}});
  if (!star.all_pass()) throw end::RejectedDatum(star);

  const end::EndFamily f = end::build_family(d, side, 20.0, tol);
  const auto& atlas = *f.atlas();
  CsvTable summary({"param", "K_min", "K_max", "lambda_min", "lambda_max", "mu_min", "mu_max", "area"});
  CsvTable table({"param", "self_adjoint", "gauss_closed_form", "gauss_curvature", "codazzi", "pass"});
  json leaves = json::array();
  std::string failures;
  for (long k = 0; k <= steps; ++k) {
    const double r = k * cfg.resolution.dr;
    const auto [lam, mu] = end::eigenvalues_at(f, r);
    SampleStats K, L, M;
    for (std::size_t g = 0; g < atlas.size(); ++g) {
      if (atlas.role(g) != fields::SampleRole::owned) continue;
      K.add(f.curvature(g, r));
      L.add(lam[g]);
      M.add(mu[g]);
    }
    const Report rep = end::leaf_report(f, r, tol.refinement_floor);
    summary.row().cell(r).cell(K.min).cell(K.max).cell(L.min).cell(L.max).cell(M.min).cell(M.max).cell(
        fields::area(f.leaf(r).I));
    table.row().cell(r);
    for (const char* name : {"self_adjoint", "gauss_closed_form", "gauss_curvature", "codazzi"}) {
      table.cell(rep.item(name).value);
    }
    table.cell(rep.all_pass());
    leaves.push_back({{"param", r}, {"report", report_json(rep)}});
    if (!rep.all_pass()) failures += " r = " + num(r) + " (" + failed_items(rep) + ")";
  }
  out.csv("family_summary.csv", summary.str());
  out.csv("gauss_codazzi.csv", table.str());
  out.json_doc("build_end_report.json", {{"command", "build-end"},
                                         {"side", end::to_string(side)},
                                         {"star", report_json(star)},
                                         {"leaves", std::move(leaves)},
                                         {"all_pass", failures.empty()}});
  if (!failures.empty()) throw Error(ErrorKind::invariant_violation, "end_family", "leaf audit failed at" + failures);
}

// ---- foliate ----

inline void cmd_foliate(const RunConfig& cfg, ArtifactWriter& out) {
  const Node p = parameters(cfg);
  p.only({"side", "curvatures", "k_grid", "dualize", "max_iter"});
  const Side side = read_side(p);
  const bool dualize = p.has("dualize") && p["dualize"].boolean();
  if (dualize && side != Side::hyperbolic) throw invalid("--dualize applies to the hyperbolic side");
  const std::vector<double> Ks = curvature_grid(p);
  foliation::LeafOptions opt;
  opt.tol = cfg.tol("newton", 1e-8);
  opt.max_iter = static_cast<int>(p.integer_or("max_iter", 50));
  const double floor = cfg.tol("refinement_floor", 1e-10);

  const Surface s = load_surface(cfg.input("surface"), cfg);
  const InfinityData d = datum_for(s, cfg);
  const end::EndFamily f = end::build_family(d, side);
  foliation::Sweep sw = foliation::foliation_sweep(f, Ks, s.signature, opt);
  for (auto& it : sw.report.items) {
    if (it.name == "gauss_bonnet") it.pass = it.value <= cfg.tol("gauss_bonnet", 0.01);
  }

  const auto& atlas = *f.atlas();
  std::vector<std::string> cols{"K", "r_mean", "r_min", "r_max", "area", "area_gb", "residual", "iterations"};
  if (dualize) cols.insert(cols.end(), {"K_dual", "dual_area", "dual_area_gb", "dual_residual"});
  CsvTable t(cols);
  std::vector<double> xs, ys;
  double dual_worst = 0.0;
  bool dual_ok = true;
  for (std::size_t k = 0; k < sw.leaves.size(); ++k) {
    const auto& leaf = sw.leaves[k];
    SampleStats r;
    for (std::size_t g = 0; g < atlas.size(); ++g) {
      if (atlas.role(g) == fields::SampleRole::owned) r.add(leaf.graph[g], atlas.weights()[g]);
    }
    t.row().cell(leaf.K).cell(r.mean()).cell(r.min).cell(r.max).cell(sw.areas[k]);
    if (s.signature) {
      t.cell(sw.gb_areas[k]);
    } else {
      t.text("");
    }
    t.cell(leaf.residual).cell(leaf.iterations);
    if (dualize) {
      const double Kd = foliation::dual_curvature(leaf.K);
      const auto audit = fields::curvature_refinement(leaf.III.values(), std::vector<double>(atlas.size(), Kd), f.atlas(),
                                                      floor);
      t.cell(Kd).cell(fields::area(leaf.III));
      if (s.signature) {
        t.cell(fields::gauss_bonnet_area(*s.signature, Kd));
      } else {
        t.text("");
      }
      t.cell(audit.residual_h);
      dual_worst = std::max(dual_worst, audit.residual_h);
      dual_ok = dual_ok && audit.pass;
    }
    xs.push_back(r.mean());
    ys.push_back(std::log(std::abs(leaf.K)));
  }
  if (dualize) {
    sw.report.items.push_back({"dual_curvature", dual_ok, dual_worst,
                               "finite-difference curvature of III against K/(K+1), largest over leaves"});
  }
  out.csv("leaves.csv", t.str());
  out.svg("leaves.svg", line_plot_svg("Leaf profile", "mean graph r", "log|K|", xs, ys));
  out.json_doc("foliate_report.json", {{"command", "foliate"},
                                       {"side", end::to_string(side)},
                                       {"curvatures", Ks},
                                       {"report", report_json(sw.report)}});
  if (!sw.report.item("nesting").pass) {
    throw Error(ErrorKind::invariant_violation, "foliation",
                "leaves are not nested (smallest gap " + num(sw.report.item("nesting").value) + ")");
  }
  if (!sw.report.all_pass()) {
    throw Error(ErrorKind::invariant_violation, "foliation", "sweep audit failed: " + failed_items(sw.report));
  }
}

// ---- dualize ----

inline double relative_gap(const std::vector<Mat2>& a, const std::vector<Mat2>& b, const fields::ChartAtlas& atlas) {
  double m = 0.0;
  for (std::size_t g = 0; g < atlas.size(); ++g) {
    if (atlas.role(g) != fields::SampleRole::owned) continue;
    m = std::max(m, max_abs(a[g] - b[g]) / std::max(1.0, max_abs(b[g])));
  }
  return m;
}

inline void cmd_dualize(const RunConfig& cfg, ArtifactWriter& out) {
  const Node p = parameters(cfg);
  p.only({"curvatures", "k_grid"});
  const std::vector<double> Ks = curvature_grid(p);
  const double floor = cfg.tol("refinement_floor", 1e-10), rt = cfg.tol("roundtrip", 1e-10);
  const Surface s = load_surface(cfg.input("surface"), cfg);
  const Pair pr = pair_for(s);
  const auto& atlas = *s.atlas;
  CsvTable t({"K", "K_dual", "area", "dual_area", "area_gb", "dual_area_gb", "gauss", "dual_gauss", "codazzi",
              "dual_codazzi", "psi_defect", "roundtrip", "pass"});
  json rows = json::array();
  std::string failures;
  for (double K : Ks) {
    const auto e = foliation::phi_K_data(pr.h, pr.hp, pr.b, K);
    const auto dual = foliation::dualize_surface(e);
    const double Kd = foliation::dual_curvature(K);
    const auto psi = foliation::psi_Kd_data(pr.h, pr.hp, pr.b, Kd);
    const auto back = foliation::dualize_surface(dual);
    const double psi_defect = std::max(relative_gap(dual.I.values(), psi.I.values(), atlas),
                                       relative_gap(dual.B.values(), psi.B.values(), atlas));
    const double round = std::max(relative_gap(back.I.values(), e.I.values(), atlas),
                                  relative_gap(back.B.values(), e.B.values(), atlas));
    const Report re = foliation::embedding_report(e, floor), rd = foliation::embedding_report(dual, floor);
    const bool ok = re.all_pass() && rd.all_pass() && psi_defect <= rt && round <= rt;
    t.row().cell(K).cell(Kd).cell(fields::area(e.I)).cell(fields::area(dual.I));
    if (s.signature) {
      t.cell(fields::gauss_bonnet_area(*s.signature, K)).cell(fields::gauss_bonnet_area(*s.signature, Kd));
    } else {
      t.text("").text("");
    }
    t.cell(re.item("gauss").value).cell(rd.item("gauss").value).cell(re.item("codazzi").value);
    t.cell(rd.item("codazzi").value).cell(psi_defect).cell(round).cell(ok);
    rows.push_back({{"K", K},
                    {"K_dual", Kd},
                    {"surface", report_json(re)},
                    {"dual", report_json(rd)},
                    {"psi_defect", psi_defect},
                    {"roundtrip", round}});
    if (!ok) failures += " K = " + num(K);
  }
  out.csv("dual.csv", t.str());
  out.json_doc("dualize_report.json", {{"command", "dualize"}, {"leaves", std::move(rows)}, {"all_pass", failures.empty()}});
  if (!failures.empty()) throw Error(ErrorKind::invariant_violation, "foliation", "duality audit failed at" + failures);
}

// ---- graft ----

inline grafting::HolonomyRep load_representation(const std::string& path) {
  const json j = load_json(path);
  const Node n(j, path);
  if (!n.has("generator")) return read_representation(n);
  n.only({"generator"});
  const Node g = n["generator"];
  const std::string name = g["name"].string();
  if (name == "torus") {
    g.only({"name", "theta"});
    return fixtures::torus_representation(g["theta"].number());
  }
  if (name == "genus2") {
    g.only({"name"});
    return fixtures::genus2_representation();
  }
  g["name"].fail("unknown representation generator '" + name + "' (known: torus, genus2)");
}

inline grafting::MeasuredMulticurve load_multicurve(const std::string& path, const grafting::SurfaceGroupPresentation& p) {
  const json j = load_json(path);
  const Node n(j, path);
  if (!n.has("generator")) return read_multicurve(n, p);
  n.only({"generator"});
  const Node g = n["generator"];
  const std::string name = g["name"].string();
  if (name == "torus") {
    g.only({"name", "weight"});
    return fixtures::torus_multicurve(p, g["weight"].number());
  }
  if (name == "genus2") {
    g.only({"name", "weights"});
    const auto w = g["weights"].numbers();
    if (w.size() != 2) g["weights"].fail("expected two weights");
    return fixtures::genus2_multicurve(p, w[0], w[1]);
  }
  g["name"].fail("unknown multicurve generator '" + name + "' (known: torus, genus2)");
}

// Projective distance relative to the squared size of the matrices.
inline double conditioned_distance(const geom::MoebiusMap& x, const geom::MoebiusMap& y) {
  const double s = 1.0 + std::max(x.norm(), y.norm());
  return projective_distance(x, y) / (s * s);
}

inline void cmd_graft(const RunConfig& cfg, ArtifactWriter& out) {
  const Node p = parameters(cfg);
  p.only({"orientation", "conjugators"});
  const int orientation = static_cast<int>(p.integer_or("orientation", 1));
  if (orientation != 1 && orientation != -1) throw invalid("parameters.orientation must be 1 or -1");
  const long conjugators = p.integer_or("conjugators", 20);
  if (conjugators < 0) throw invalid("parameters.conjugators must be nonnegative");
  const grafting::RepTolerances tol{cfg.tol("relation", 1e-8), cfg.tol("cone", 1e-8), 1e-8};

  const grafting::HolonomyRep rho = load_representation(cfg.input("representation"));
  const grafting::MeasuredMulticurve lambda = load_multicurve(cfg.input("multicurve"), rho.presentation());
  const grafting::HolonomyRep grafted = grafting::graft_holonomy(rho, lambda, orientation, tol);
  Report r = grafted.report(tol);

  std::mt19937_64 rng(cfg.seed);
  double eq = 0.0;
  for (long k = 0; k < conjugators; ++k) {
    auto draw = [&] { return std::complex<double>(2.0 * unit_draw(rng) - 1.0, 2.0 * unit_draw(rng) - 1.0); };
    // Badly conditioned conjugators push the absolute relation check past its tolerance by round-off alone.
    geom::MoebiusMap A;
    do {
      const auto a = draw(), b = draw(), c = draw(), d = draw();
      if (std::abs(a * d - b * c) >= 0.1) A = geom::MoebiusMap(a, b, c, d);
    } while (A.norm() > max_conjugator_norm);
    const grafting::HolonomyRep lhs = grafting::graft_holonomy(rho.conjugated(A), lambda, orientation, tol);
    for (std::size_t g = 0; g < rho.presentation().size(); ++g) {
      eq = std::max(eq, conditioned_distance(lhs.images()[g], grafted.images()[g].conjugated_by(A)));
    }
  }
  r.items.push_back({"equivariance", eq <= cfg.tol("equivariance", 1e-9), eq,
                     "grafting commutes with conjugation over " + std::to_string(conjugators) + " random conjugators"});

  json curves = json::array();
  for (const auto& c : lambda.curves) {
    const double tr = std::abs(rho.eval(c.word).trace());
    const double length = 2.0 * std::acosh(std::max(1.0, 0.5 * tr));
    curves.push_back({{"word", rho.presentation().to_string(c.word)},
                      {"weight", c.weight},
                      {"length", length},
                      {"annulus_module", grafting::annulus_module(length, c.weight)}});
  }
  out.json_doc("grafted_representation.json", {{"representation", representation_json(grafted)}});
  out.json_doc("graft_report.json", {{"command", "graft"},
                                     {"orientation", orientation},
                                     {"homomorphism_residual", grafted.relation_defect()},
                                     {"curves", std::move(curves)},
                                     {"report", report_json(r)}});
  if (!r.all_pass()) throw Error(ErrorKind::invariant_violation, "grafting_holonomy", "graft audit failed: " + failed_items(r));
}

// ---- schwarzian ----

using Germ = schwarzian::HolomorphicSample<std::complex<double>>;

struct GermInput {
  std::string kind;
  Germ germ;
  std::optional<int> power;
};

inline GermInput load_germ(const std::string& path) {
  using cplx = std::complex<double>;
  const json j = load_json(path);
  const Node n(j, path);
  const std::string kind = n["kind"].string();
  if (kind == "mobius") {
    n.only({"kind", "a", "b", "c", "d"});
    const cplx a = n["a"].complex(), b = n["b"].complex(), c = n["c"].complex(), d = n["d"].complex();
    if (std::abs(a * d - b * c) < 1e-14) n.fail("ad - bc must not vanish");
    return {kind, schwarzian::mobius_sample<cplx>(a, b, c, d), std::nullopt};
  }
  if (kind == "polynomial") {
    n.only({"kind", "coeffs"});
    std::vector<cplx> c;
    const Node cs = n["coeffs"];
    for (std::size_t k = 0; k < cs.size(); ++k) c.push_back(cs[k].complex());
    if (c.empty()) n["coeffs"].fail("expected at least one coefficient");
    return {kind, schwarzian::polynomial_sample<cplx>(c), std::nullopt};
  }
  if (kind == "power") {
    n.only({"kind", "k"});
    const int k = static_cast<int>(n["k"].integer());
    return {kind, schwarzian::power_sample<cplx>(k), k};
  }
  if (kind == "exp") {
    n.only({"kind"});
    return {kind, schwarzian::exp_sample<cplx>(), std::nullopt};
  }
  n["kind"].fail("germ kind must be mobius, polynomial, power or exp");
}

inline void cmd_schwarzian(const RunConfig& cfg, ArtifactWriter& out) {
  using cplx = std::complex<double>;
  const Node p = parameters(cfg);
  p.only({"points", "radius", "cone_angles", "finite_difference", "fd_h", "fd_points"});
  const long points = p.integer_or("points", 64);
  const double radius = p.number_or("radius", 0.5);
  if (points < 1 || !(radius > 0.0)) throw invalid("parameters.points must be positive and radius > 0");
  schwarzian::FdOptions<double> fd;
  fd.h = p.number_or("fd_h", fd.h);
  fd.points = static_cast<int>(p.integer_or("fd_points", fd.points));
  const bool use_fd = p.has("finite_difference") && p["finite_difference"].boolean();

  GermInput in = load_germ(cfg.input("germ"));
  const Germ germ = use_fd ? Germ([g = in.germ](const cplx& z) { return g(z); }, in.germ.domain()) : in.germ;

  // Sample points in the annulus radius/4 <= |z| <= radius.
  std::mt19937_64 rng(cfg.seed);
  CsvTable t({"x", "y", "S_re", "S_im", "abs_S"});
  double max_abs = 0.0, closed = 0.0, invariance = 0.0;
  const Germ A = schwarzian::mobius_sample<cplx>(cplx(1.0, 0.2), cplx(0.3, -0.1), cplx(0.1, 0.05), cplx(0.9, 0.0));
  const Germ Af = schwarzian::compose(A, germ);
  for (long k = 0; k < points; ++k) {
    const double r = radius * (0.25 + 0.75 * unit_draw(rng));
    const cplx z = std::polar(r, 2.0 * M_PI * unit_draw(rng));
    const cplx S = schwarzian::schwarzian(germ, z, fd);
    if (!std::isfinite(std::abs(S))) throw invalid("the germ is singular at " + num(z.real()) + " + " + num(z.imag()) + "i");
    t.row().cell(z.real()).cell(z.imag()).cell(S.real()).cell(S.imag()).cell(std::abs(S));
    max_abs = std::max(max_abs, std::abs(S));
    if (in.power) closed = std::max(closed, std::abs(S - (1.0 - *in.power * *in.power) / (2.0 * z * z)));
    if (in.kind == "exp") closed = std::max(closed, std::abs(S + 0.5));
    invariance = std::max(invariance, std::abs(schwarzian::schwarzian(Af, z, fd) - S) / std::max(1.0, std::abs(S)));
  }
  const double kernel = cfg.tol("kernel", 1e-9);
  Report r;
  r.items.push_back({"max_abs_schwarzian", in.kind != "mobius" || max_abs <= kernel, max_abs,
                     in.kind == "mobius" ? "Moebius germs have vanishing Schwarzian" : "largest |S| over the sample points"});
  if (in.power || in.kind == "exp") {
    r.items.push_back({"closed_form", closed <= 1e-8 * std::max(1.0, max_abs), closed, "deviation from the closed form"});
  }
  r.items.push_back({"left_moebius_invariance", invariance <= 1e-8, invariance, "relative change of S under A o f"});

  json cones = json::array();
  if (p.has("cone_angles")) {
    schwarzian::ConeOptions opt;
    opt.samples = cfg.resolution.n_alpha;
    opt.zero_tol = cfg.tol("zero", opt.zero_tol);
    opt.scale_tol = cfg.tol("scale", opt.scale_tol);
    opt.fd = fd;
    for (double theta : p["cone_angles"].numbers()) {
      const auto c = schwarzian::cone_schwarzian_expansion(germ, theta, opt);
      cones.push_back({{"theta", theta},
                       {"pole_order", c.pole_order},
                       {"slope", c.slope},
                       {"slope_band", c.slope_band},
                       {"leading_coeff", complex_json(c.leading_coeff)},
                       {"u_coeff", complex_json(c.u_coeff)},
                       {"scale_check", c.scale_check},
                       {"vanishing", c.vanishing},
                       {"radii", c.radii},
                       {"ring_mean", c.ring_mean},
                       {"report", report_json(c.report)}});
      for (const auto& it : c.report.items) r.items.push_back({"cone(" + num(theta) + ")." + it.name, it.pass, it.value, it.detail});
    }
  }
  out.csv("schwarzian_samples.csv", t.str());
  out.json_doc("schwarzian_report.json", {{"command", "schwarzian"},
                                          {"germ", in.kind},
                                          {"exact_jets", germ.has_exact_jet()},
                                          {"max_abs_schwarzian", max_abs},
                                          {"cone", std::move(cones)},
                                          {"report", report_json(r)}});
  if (!r.all_pass()) throw Error(ErrorKind::invariant_violation, "schwarzian", "schwarzian audit failed: " + failed_items(r));
}

// ---- verify ----

inline void cmd_verify(const RunConfig& cfg, ArtifactWriter& out) {
  parameters(cfg).only({});
  const Surface s = load_surface(cfg.input("surface"), cfg);
  const Pair pr = pair_for(s);
  fields::PairTolerances tol;
  tol.pullback = cfg.tol("pullback", tol.pullback);
  tol.self_adjoint = cfg.tol("self_adjoint", tol.self_adjoint);
  tol.determinant = cfg.tol("determinant", tol.determinant);
  tol.refinement_floor = cfg.tol("refinement_floor", tol.refinement_floor);
  const Report r = fields::verify_normalized_pair(pr.h, pr.hp, pr.b, tol);
  out.json_doc("verify_report.json", {{"command", "verify"}, {"report", report_json(r)}});
  if (!r.all_pass()) throw Error(ErrorKind::rejected_datum, "surface_fields", "normalized pair rejected: " + failed_items(r));
}

inline void run(const RunConfig& cfg, ArtifactWriter& out) {
  if (cfg.command == "build-end") return cmd_build_end(cfg, out);
  if (cfg.command == "foliate") return cmd_foliate(cfg, out);
  if (cfg.command == "dualize") return cmd_dualize(cfg, out);
  if (cfg.command == "graft") return cmd_graft(cfg, out);
  if (cfg.command == "schwarzian") return cmd_schwarzian(cfg, out);
  if (cfg.command == "verify") return cmd_verify(cfg, out);
  throw invalid("unknown command '" + cfg.command + "'");
}

}  // namespace hyperend::io
