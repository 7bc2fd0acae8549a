#pragma once

#include <complex>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "hyperend/core/error.hpp"
#include "hyperend/core/report.hpp"
#include "hyperend/fields/field.hpp"
#include "hyperend/fields/signature.hpp"
#include "hyperend/geom/moebius.hpp"
#include "hyperend/grafting/holonomy.hpp"
#include "hyperend/infinity/quad_diff.hpp"

namespace hyperend::io {

using json = nlohmann::json;
using fields::AtlasPtr;
using fields::Chart;
using fields::ChartAtlas;
using fields::ChartKind;
using fields::Overlap;
using fields::SampleRole;

inline Error parse_error(const std::string& where, const std::string& what) {
  return Error(ErrorKind::parse_error, "cli_io", where + ": " + what);
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io_error, "cli_io", "cannot open '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Parses a JSON document; syntax errors report the line and column.
inline json parse_json(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // Drop the "[json.exception.parse_error.N] " prefix; the rest names line and column.
    std::string what = e.what();
    if (const auto k = what.find("] "); k != std::string::npos) what = what.substr(k + 2);
    throw parse_error(source, what);
  }
}

inline json load_json(const std::string& path) { return parse_json(read_text(path), path); }

// Typed access to a JSON document that reports failures by JSON pointer.
class Node {
 public:
  Node(const json& j, std::string source, std::string pointer = "")
      : j_(&j), source_(std::move(source)), ptr_(std::move(pointer)) {}

  const json& raw() const { return *j_; }
  const std::string& pointer() const { return ptr_; }
  std::string where() const { return source_ + " at " + (ptr_.empty() ? "/" : ptr_); }
  [[noreturn]] void fail(const std::string& what) const { throw parse_error(where(), what); }

  bool has(const std::string& key) const { return j_->is_object() && j_->contains(key); }

  Node operator[](const std::string& key) const {
    if (!j_->is_object()) fail("expected an object");
    if (!j_->contains(key)) fail("missing key '" + key + "'");
    return {j_->at(key), source_, ptr_ + "/" + key};
  }
  Node operator[](std::size_t k) const {
    if (!j_->is_array()) fail("expected an array");
    if (k >= j_->size()) fail("index " + std::to_string(k) + " out of range");
    return {j_->at(k), source_, ptr_ + "/" + std::to_string(k)};
  }
  std::size_t size() const {
    if (!j_->is_array()) fail("expected an array");
    return j_->size();
  }

  // Rejects keys outside `allowed`.
  void only(std::initializer_list<const char*> allowed) const {
    if (!j_->is_object()) fail("expected an object");
    for (const auto& [k, v] : j_->items()) {
      bool ok = false;
      for (const char* a : allowed) ok = ok || k == a;
      if (!ok) fail("unknown key '" + k + "'");
    }
  }

  double number() const {
    if (!j_->is_number()) fail("expected a number");
    return j_->get<double>();
  }
  long integer() const {
    if (!j_->is_number_integer()) fail("expected an integer");
    return j_->get<long>();
  }
  bool boolean() const {
    if (!j_->is_boolean()) fail("expected a boolean");
    return j_->get<bool>();
  }
  std::string string() const {
    if (!j_->is_string()) fail("expected a string");
    return j_->get<std::string>();
  }
  std::vector<double> numbers() const {
    std::vector<double> v;
    for (std::size_t k = 0; k < size(); ++k) v.push_back((*this)[k].number());
    return v;
  }
  std::complex<double> complex() const {
    if (!j_->is_array() || j_->size() != 2) fail("expected [re, im]");
    return {(*this)[0].number(), (*this)[1].number()};
  }
  std::array<double, 2> pair() const {
    if (!j_->is_array() || j_->size() != 2) fail("expected two numbers");
    return {(*this)[0].number(), (*this)[1].number()};
  }

  double number_or(const std::string& key, double fallback) const { return has(key) ? (*this)[key].number() : fallback; }
  long integer_or(const std::string& key, long fallback) const { return has(key) ? (*this)[key].integer() : fallback; }
  std::string string_or(const std::string& key, const std::string& fallback) const {
    return has(key) ? (*this)[key].string() : fallback;
  }

 private:
  const json* j_;
  std::string source_;
  std::string ptr_;
};

inline json complex_json(std::complex<double> z) { return json::array({z.real(), z.imag()}); }

// ---- atlas ----

inline json chart_json(const Chart& c) {
  json j;
  j["id"] = c.id;
  if (c.kind == ChartKind::rect) {
    j["kind"] = "rect";
    j["origin"] = {c.origin[0], c.origin[1]};
    j["spacing"] = {c.spacing[0], c.spacing[1]};
    j["dims"] = {c.dims[0], c.dims[1]};
  } else {
    j["kind"] = "polar";
    j["r_min"] = c.r_min();
    j["r_max"] = c.r_max();
    j["n_r"] = c.dims[0];
    j["n_alpha"] = c.dims[1];
    j["period"] = c.period;
  }
  return j;
}

inline Chart read_chart(const Node& n) {
  const std::string kind = n["kind"].string();
  const int id = static_cast<int>(n["id"].integer());
  if (kind == "rect") {
    n.only({"id", "kind", "origin", "spacing", "dims"});
    const auto d = n["dims"];
    return Chart::rect(id, n["origin"].pair(), n["spacing"].pair(),
                       {static_cast<int>(d[0].integer()), static_cast<int>(d[1].integer())});
  }
  if (kind == "polar") {
    n.only({"id", "kind", "r_min", "r_max", "n_r", "n_alpha", "period"});
    return Chart::polar(id, n["r_min"].number(), n["r_max"].number(), static_cast<int>(n["n_r"].integer()),
                        static_cast<int>(n["n_alpha"].integer()), n["period"].number());
  }
  n["kind"].fail("chart kind must be 'rect' or 'polar'");
}

inline json atlas_json(const ChartAtlas& a) {
  json j;
  j["charts"] = json::array();
  for (const Chart& c : a.charts()) j["charts"].push_back(chart_json(c));
  j["overlaps"] = json::array();
  for (const Overlap& o : a.overlaps()) {
    j["overlaps"].push_back({{"chart", o.chart},
                             {"i", o.i},
                             {"j", o.j},
                             {"donor", o.donor},
                             {"at", {o.at[0], o.at[1]}},
                             {"jacobian", {{o.jacobian(0, 0), o.jacobian(0, 1)}, {o.jacobian(1, 0), o.jacobian(1, 1)}}}});
  }
  j["inactive"] = json::array();
  for (std::size_t g = 0; g < a.size(); ++g) {
    if (a.role(g) != SampleRole::inactive) continue;
    const auto s = a.locate(g);
    j["inactive"].push_back({a.charts()[s.chart].id, s.i, s.j});
  }
  if (a.weights() != a.default_weights()) j["weights"] = a.weights();
  return j;
}

inline AtlasPtr read_atlas(const Node& n) {
  n.only({"charts", "overlaps", "inactive", "weights"});
  std::vector<Chart> charts;
  const Node cs = n["charts"];
  for (std::size_t k = 0; k < cs.size(); ++k) charts.push_back(read_chart(cs[k]));
  std::vector<Overlap> overlaps;
  if (n.has("overlaps")) {
    const Node os = n["overlaps"];
    for (std::size_t k = 0; k < os.size(); ++k) {
      const Node o = os[k];
      o.only({"chart", "i", "j", "donor", "at", "jacobian"});
      Overlap ov;
      ov.chart = static_cast<int>(o["chart"].integer());
      ov.i = static_cast<int>(o["i"].integer());
      ov.j = static_cast<int>(o["j"].integer());
      ov.donor = static_cast<int>(o["donor"].integer());
      ov.at = o["at"].pair();
      if (o.has("jacobian")) {
        const auto r0 = o["jacobian"][0].pair(), r1 = o["jacobian"][1].pair();
        ov.jacobian = mat2(r0[0], r0[1], r1[0], r1[1]);
      }
      overlaps.push_back(ov);
    }
  }
  // Roles are needed before construction; build a provisional atlas for indexing.
  std::vector<SampleRole> roles;
  std::vector<double> weights;
  if (n.has("inactive") || n.has("weights")) {
    const ChartAtlas plain(charts);
    roles.assign(plain.size(), SampleRole::owned);
    if (n.has("inactive")) {
      const Node in = n["inactive"];
      for (std::size_t k = 0; k < in.size(); ++k) {
        const Node s = in[k];
        if (s.size() != 3) s.fail("expected [chart_id, i, j]");
        try {
          roles[plain.global(plain.position(static_cast<int>(s[0].integer())), static_cast<int>(s[1].integer()),
                             static_cast<int>(s[2].integer()))] = SampleRole::inactive;
        } catch (const Error& e) {
          s.fail(e.what());
        }
      }
    }
    if (n.has("weights")) weights = n["weights"].numbers();
  }
  try {
    return std::make_shared<const ChartAtlas>(std::move(charts), std::move(overlaps), std::move(roles),
                                              std::move(weights));
  } catch (const Error& e) {
    throw Error(ErrorKind::out_of_domain, "cli_io", n.where() + ": " + e.what());
  }
}

// ---- field blocks: one block per (role, chart), values in row-major (i, j) order ----

// Scalars are numbers, metrics [g11, g12, g22], operators [a11, a12, a21, a22], complex values [re, im].
inline json value_json(double v) { return v; }
inline json value_json(const std::complex<double>& z) { return complex_json(z); }
inline json metric_json(const Mat2& m) { return json::array({m(0, 0), m(0, 1), m(1, 1)}); }
inline json operator_json(const Mat2& m) { return json::array({m(0, 0), m(0, 1), m(1, 0), m(1, 1)}); }

template <class Tag, class V>
json field_blocks(const fields::Field<Tag, V>& f) {
  const ChartAtlas& a = *f.atlas();
  json out = json::array();
  for (std::size_t pos = 0; pos < a.charts().size(); ++pos) {
    const Chart& c = a.charts()[pos];
    json values = json::array();
    for (std::size_t k = 0; k < c.size(); ++k) {
      const V& v = f[a.offset(static_cast<int>(pos)) + k];
      if constexpr (std::is_same_v<Tag, fields::MetricTag>) {
        values.push_back(metric_json(v));
      } else if constexpr (std::is_same_v<Tag, fields::OperatorTag>) {
        values.push_back(operator_json(v));
      } else {
        values.push_back(value_json(v));
      }
    }
    out.push_back({{"role", f.role()}, {"chart_id", c.id}, {"layout", "row-major"}, {"values", std::move(values)}});
  }
  return out;
}

enum class ValueShape { scalar, complex, metric, op };

inline ValueShape shape_of(const Node& v) {
  if (v.raw().is_number()) return ValueShape::scalar;
  if (!v.raw().is_array()) v.fail("expected a number or an array");
  switch (v.raw().size()) {
    case 2: return ValueShape::complex;
    case 3: return ValueShape::metric;
    case 4: return ValueShape::op;
    default: v.fail("values must have 1, 2, 3 or 4 components");
  }
}

// Fields read from a list of blocks, keyed by role.  Fringe samples are refilled from donors.
struct FieldSet {
  std::map<std::string, fields::ScalarField> scalars;
  std::map<std::string, fields::ComplexField> complexes;
  std::map<std::string, fields::MetricField> metrics;
  std::map<std::string, fields::OperatorField> operators;
};

inline FieldSet read_field_blocks(const Node& blocks, const AtlasPtr& atlas) {
  struct Raw {
    ValueShape shape;
    std::vector<std::vector<double>> values;
    std::vector<bool> seen;
  };
  std::map<std::string, Raw> raw;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    const Node blk = blocks[b];
    blk.only({"role", "chart_id", "layout", "values"});
    const std::string role = blk["role"].string();
    if (blk.string_or("layout", "row-major") != "row-major") blk["layout"].fail("only 'row-major' is supported");
    const int id = static_cast<int>(blk["chart_id"].integer());
    int pos = -1;
    try {
      pos = atlas->position(id);
    } catch (const Error&) {
      blk["chart_id"].fail("no chart with id " + std::to_string(id));
    }
    const Chart& c = atlas->charts()[pos];
    const Node vals = blk["values"];
    if (vals.size() != c.size()) {
      vals.fail("expected " + std::to_string(c.size()) + " values, found " + std::to_string(vals.size()));
    }
    const ValueShape shape = c.size() ? shape_of(vals[0]) : ValueShape::scalar;
    auto [it, fresh] = raw.try_emplace(role, Raw{shape, std::vector<std::vector<double>>(atlas->size()),
                                                 std::vector<bool>(atlas->charts().size(), false)});
    Raw& r = it->second;
    if (r.shape != shape) blk.fail("role '" + role + "' mixes value shapes");
    if (r.seen[pos]) blk.fail("role '" + role + "' repeats chart " + std::to_string(id));
    r.seen[pos] = true;
    for (std::size_t k = 0; k < c.size(); ++k) {
      const Node v = vals[k];
      if (shape_of(v) != shape) v.fail("value shape differs from the first value of the block");
      std::vector<double> x = shape == ValueShape::scalar ? std::vector<double>{v.number()} : v.numbers();
      r.values[atlas->offset(pos) + k] = std::move(x);
    }
  }
  FieldSet out;
  for (auto& [role, r] : raw) {
    for (std::size_t pos = 0; pos < r.seen.size(); ++pos) {
      if (!r.seen[pos]) blocks.fail("role '" + role + "' has no block for chart " + std::to_string(atlas->charts()[pos].id));
    }
    const std::size_t n = atlas->size();
    switch (r.shape) {
      case ValueShape::scalar: {
        std::vector<double> v(n);
        for (std::size_t g = 0; g < n; ++g) v[g] = r.values[g][0];
        fields::ScalarField f(atlas, role, std::move(v));
        fields::fill_fringe(f);
        out.scalars.emplace(role, std::move(f));
        break;
      }
      case ValueShape::complex: {
        std::vector<std::complex<double>> v(n);
        for (std::size_t g = 0; g < n; ++g) v[g] = {r.values[g][0], r.values[g][1]};
        fields::ComplexField f(atlas, role, std::move(v));
        fields::fill_fringe(f);
        out.complexes.emplace(role, std::move(f));
        break;
      }
      case ValueShape::metric: {
        std::vector<Mat2> v(n);
        for (std::size_t g = 0; g < n; ++g) {
          const auto& x = r.values[g];
          v[g] = mat2(x[0], x[1], x[1], x[2]);
        }
        fields::MetricField f(atlas, role, std::move(v));
        fields::fill_fringe(f);
        out.metrics.emplace(role, std::move(f));
        break;
      }
      case ValueShape::op: {
        std::vector<Mat2> v(n);
        for (std::size_t g = 0; g < n; ++g) {
          const auto& x = r.values[g];
          v[g] = mat2(x[0], x[1], x[2], x[3]);
        }
        fields::OperatorField f(atlas, role, std::move(v));
        fields::fill_fringe(f);
        out.operators.emplace(role, std::move(f));
        break;
      }
    }
  }
  return out;
}

// ---- signature ----

inline json signature_json(const fields::ConeSignature& s) { return {{"genus", s.genus}, {"cone_angles", s.angles}}; }

inline fields::ConeSignature read_signature(const Node& n) {
  n.only({"genus", "cone_angles"});
  fields::ConeSignature s;
  s.genus = static_cast<int>(n["genus"].integer());
  s.angles = n["cone_angles"].numbers();
  return s;
}

// ---- quadratic differential ----

inline json quad_diff_json(const infinity::QuadDiff& q) {
  return {{"fields", field_blocks(q.f)}, {"poles", q.pole_orders}};
}

inline std::vector<int> read_poles(const Node& n, const ChartAtlas& atlas) {
  std::vector<int> poles;
  if (n.has("poles")) {
    const Node p = n["poles"];
    for (std::size_t k = 0; k < p.size(); ++k) poles.push_back(static_cast<int>(p[k].integer()));
  }
  std::size_t polar = 0;
  for (const Chart& c : atlas.charts()) polar += c.kind == ChartKind::polar;
  if (!poles.empty() && poles.size() != polar) {
    n["poles"].fail("expected one pole order per polar chart (" + std::to_string(polar) + ")");
  }
  if (poles.empty()) poles.assign(polar, 0);
  return poles;
}

// Either explicit blocks of role "q" or a polynomial in each chart's conformal coordinate.
inline infinity::QuadDiff read_quad_diff(const Node& n, const AtlasPtr& atlas) {
  n.only({"fields", "poles", "polynomial"});
  if (n.has("fields") == n.has("polynomial")) n.fail("give exactly one of 'fields' and 'polynomial'");
  const std::vector<int> poles = read_poles(n, *atlas);
  if (n.has("polynomial")) {
    std::vector<std::complex<double>> c;
    const Node p = n["polynomial"];
    for (std::size_t k = 0; k < p.size(); ++k) c.push_back(p[k].complex());
    return infinity::make_quad_diff(
        atlas,
        [&](std::complex<double> z, const Chart&) {
          std::complex<double> acc = 0.0;
          for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * z + *it;
          return acc;
        },
        poles);
  }
  FieldSet fs = read_field_blocks(n["fields"], atlas);
  if (!fs.complexes.count("q") || fs.complexes.size() + fs.scalars.size() + fs.metrics.size() + fs.operators.size() != 1) {
    n["fields"].fail("expected a single complex field with role 'q'");
  }
  return {std::move(fs.complexes.at("q")), poles};
}

// ---- reports ----

inline json report_json(const Report& r) {
  json items = json::array();
  for (const auto& it : r.items) {
    items.push_back({{"name", it.name}, {"pass", it.pass}, {"value", it.value}, {"detail", it.detail}});
  }
  return {{"all_pass", r.all_pass()}, {"items", std::move(items)}};
}

// ---- representations and multicurves ----

inline json moebius_json(const geom::MoebiusMap& m) {
  return json::array({complex_json(m.a()), complex_json(m.b()), complex_json(m.c()), complex_json(m.d())});
}

inline geom::MoebiusMap read_moebius(const Node& n) {
  if (n.size() != 4) n.fail("expected [a, b, c, d] with complex entries");
  try {
    return geom::MoebiusMap(n[0].complex(), n[1].complex(), n[2].complex(), n[3].complex());
  } catch (const Error& e) {
    n.fail(e.what());
  }
}

inline json representation_json(const grafting::HolonomyRep& rho) {
  const auto& p = rho.presentation();
  json gens = json::object();
  for (std::size_t g = 0; g < p.size(); ++g) gens[p.names()[g]] = moebius_json(rho.images()[g]);
  return {{"genus", p.genus()},
          {"generators", p.names()},
          {"relation", p.to_string(p.relation())},
          {"images", std::move(gens)},
          {"cone_angles", rho.cone_angles()},
          {"kind", grafting::to_string(rho.kind())}};
}

inline grafting::HolonomyRep read_representation(const Node& n) {
  n.only({"genus", "generators", "relation", "images", "cone_angles", "kind"});
  const int genus = static_cast<int>(n["genus"].integer());
  std::vector<std::string> names;
  const Node gs = n["generators"];
  for (std::size_t k = 0; k < gs.size(); ++k) names.push_back(gs[k].string());
  const std::string kind = n.string_or("kind", "fuchsian");
  if (kind != "fuchsian" && kind != "complex") n["kind"].fail("kind must be 'fuchsian' or 'complex'");
  std::optional<grafting::SurfaceGroupPresentation> p;
  try {
    if (n.has("relation")) {
      p.emplace(genus, names, n["relation"].string());
    } else {
      std::vector<std::string> cones(names.begin() + std::min<std::size_t>(names.size(), 2 * genus), names.end());
      p.emplace(genus, cones);
      if (p->names() != names) n["generators"].fail("generator names must be a1, b1, ..., then cone loops");
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::parse_error) n.fail(e.what());
    throw;
  }
  std::vector<geom::MoebiusMap> images;
  const Node im = n["images"];
  for (const auto& name : p->names()) images.push_back(read_moebius(im[name]));
  if (im.raw().size() != images.size()) im.fail("images must list exactly the generators");
  return {*p, std::move(images), n["cone_angles"].numbers(),
          kind == "fuchsian" ? grafting::RepKind::fuchsian : grafting::RepKind::complex};
}

inline json multicurve_json(const grafting::MeasuredMulticurve& m, const grafting::SurfaceGroupPresentation& p) {
  json curves = json::array();
  for (const auto& c : m.curves) {
    json cr = json::array();
    for (const auto& x : c.crossings) {
      json e = {{"generator", p.names()[x.generator]}, {"position", x.position}, {"sign", x.sign}};
      if (!x.conjugator.empty()) e["conjugator"] = p.to_string(x.conjugator);
      cr.push_back(std::move(e));
    }
    curves.push_back({{"word", p.to_string(c.word)}, {"weight", c.weight}, {"crossings", std::move(cr)}});
  }
  return {{"curves", std::move(curves)}};
}

inline grafting::MeasuredMulticurve read_multicurve(const Node& n, const grafting::SurfaceGroupPresentation& p) {
  n.only({"curves"});
  grafting::MeasuredMulticurve m;
  const Node cs = n["curves"];
  auto parse = [&](const Node& w) {
    try {
      return p.parse(w.string());
    } catch (const Error& e) {
      w.fail(e.what());
    }
  };
  for (std::size_t k = 0; k < cs.size(); ++k) {
    const Node c = cs[k];
    c.only({"word", "weight", "crossings"});
    grafting::MeasuredCurve curve{parse(c["word"]), c["weight"].number(), {}};
    const Node xs = c["crossings"];
    for (std::size_t q = 0; q < xs.size(); ++q) {
      const Node x = xs[q];
      x.only({"generator", "position", "sign", "conjugator"});
      grafting::Crossing cr;
      try {
        cr.generator = p.index(x["generator"].string());
      } catch (const Error& e) {
        x["generator"].fail(e.what());
      }
      cr.position = x["position"].number();
      cr.sign = static_cast<int>(x["sign"].integer());
      if (x.has("conjugator")) cr.conjugator = parse(x["conjugator"]);
      curve.crossings.push_back(std::move(cr));
    }
    m.curves.push_back(std::move(curve));
  }
  return m;
}

}  // namespace hyperend::io
