#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "hyperend/core/error.hpp"
#include "hyperend/core/format.hpp"
#include "hyperend/core/report.hpp"
#include "hyperend/geom/moebius.hpp"
#include "hyperend/grafting/words.hpp"

namespace hyperend::grafting {

using geom::MoebiusMap;
using geom::SpherePoint;

enum class RepKind { fuchsian, complex };

inline std::string to_string(RepKind k) { return k == RepKind::fuchsian ? "fuchsian" : "complex"; }

struct RepTolerances {
  double relation = 1e-8;
  double cone = 1e-8;
  double fuchsian = 1e-8;
};

// Images of the presentation's generators in PSL(2, C).
class HolonomyRep {
 public:
  HolonomyRep(SurfaceGroupPresentation presentation, std::vector<MoebiusMap> images, std::vector<double> cone_angles,
              RepKind kind)
      : pres_(std::move(presentation)), images_(std::move(images)), angles_(std::move(cone_angles)), kind_(kind) {
    if (images_.size() != pres_.size()) {
      throw Error(ErrorKind::invalid_representation, "grafting_holonomy", "one matrix per generator is required");
    }
    if (angles_.size() != pres_.cone_count()) {
      throw Error(ErrorKind::invalid_representation, "grafting_holonomy", "one angle per cone loop is required");
    }
    for (double a : angles_) {
      if (!(a > 0.0 && a < 2.0 * M_PI)) {
        throw Error(ErrorKind::invalid_representation, "grafting_holonomy", "cone angle " + num(a) + " outside (0, 2pi)");
      }
    }
  }

  const SurfaceGroupPresentation& presentation() const noexcept { return pres_; }
  const std::vector<MoebiusMap>& images() const noexcept { return images_; }
  const std::vector<double>& cone_angles() const noexcept { return angles_; }
  RepKind kind() const noexcept { return kind_; }
  const MoebiusMap& image(int gen) const { return images_.at(gen); }

  MoebiusMap eval(const Word& w) const {
    MoebiusMap m;
    for (const Letter& l : w) m = m * (l.inverse ? images_[l.gen].inverse() : images_[l.gen]);
    return m;
  }
  MoebiusMap eval(const std::string& w) const { return eval(pres_.parse(w)); }

  HolonomyRep conjugated(const MoebiusMap& A) const {
    std::vector<MoebiusMap> out;
    for (const auto& g : images_) out.push_back(g.conjugated_by(A));
    return {pres_, std::move(out), angles_, kind_};
  }

  double relation_defect() const { return projective_distance(eval(pres_.relation()), MoebiusMap::identity()); }

  // max over cone loops of | |tr| - 2|cos(theta/2)| |.
  double cone_defect() const {
    double m = 0.0;
    for (std::size_t j = 0; j < angles_.size(); ++j) {
      const double tr = std::abs(images_[pres_.cone_generator(j)].trace());
      m = std::max(m, std::abs(tr - 2.0 * std::abs(std::cos(0.5 * angles_[j]))));
    }
    return m;
  }

  // Largest imaginary part of the traces of generators and of their pairwise
  // products, relative to the norms of the factors so that conjugating by a
  // large element does not turn round-off into a defect.
  double fuchsian_defect() const {
    double m = 0.0;
    for (std::size_t i = 0; i < images_.size(); ++i) {
      const double ni = std::max(1.0, images_[i].norm());
      m = std::max(m, std::abs(images_[i].trace().imag()) / ni);
      for (std::size_t j = i + 1; j < images_.size(); ++j) {
        const double nij = ni * std::max(1.0, images_[j].norm());
        m = std::max(m, std::abs((images_[i] * images_[j]).trace().imag()) / nij);
      }
    }
    return m;
  }

  Report report(const RepTolerances& tol = {}) const {
    Report r;
    const double rel = relation_defect(), cone = cone_defect();
    r.items.push_back({"relation", rel <= tol.relation, rel, "distance of the relation image from the identity"});
    r.items.push_back({"cone_loops", cone <= tol.cone, cone, "| |tr| - 2|cos(theta/2)| | over cone loops"});
    if (kind_ == RepKind::fuchsian) {
      const double f = fuchsian_defect();
      r.items.push_back({"fuchsian", f <= tol.fuchsian, f, "largest imaginary trace part relative to the factor norms"});
    }
    return r;
  }

  void validate(const RepTolerances& tol = {}) const {
    const Report r = report(tol);
    for (const auto& it : r.items) {
      if (!it.pass) {
        throw Error(ErrorKind::invalid_representation, "grafting_holonomy", it.name + " check failed: " + it.detail + " = " + num(it.value));
      }
    }
  }

 private:
  SurfaceGroupPresentation pres_;
  std::vector<MoebiusMap> images_;
  std::vector<double> angles_;
  RepKind kind_;
};

// A crossing of a generator loop with a lift of a curve.  The crossed lift is
// the axis of rho(conjugator * curve * conjugator^-1).
struct Crossing {
  int generator = 0;
  double position = 0.0;  // order along the generator loop
  int sign = 1;
  Word conjugator;
};

struct MeasuredCurve {
  Word word;
  double weight = 0.0;
  std::vector<Crossing> crossings;
};

struct MeasuredMulticurve {
  std::vector<MeasuredCurve> curves;

  void validate(const SurfaceGroupPresentation& p) const {
    for (std::size_t i = 0; i < curves.size(); ++i) {
      const auto& c = curves[i];
      const std::string tag = "curve " + std::to_string(i);
      if (!(c.weight > 0.0) || !std::isfinite(c.weight)) {
        throw Error(ErrorKind::invalid_multicurve, "grafting_holonomy", tag + " has nonpositive weight");
      }
      const Word w = reduce(c.word);
      if (w.empty()) throw Error(ErrorKind::invalid_multicurve, "grafting_holonomy", tag + " is trivial");
      bool cone_power = true;
      for (const Letter& l : w) cone_power = cone_power && l.gen == w.front().gen && l.gen >= 2 * p.genus();
      if (cone_power) {
        throw Error(ErrorKind::invalid_multicurve, "grafting_holonomy", tag + " is a cone loop");
      }
      for (const auto& x : c.crossings) {
        if (x.generator < 0 || x.generator >= static_cast<int>(p.size())) {
          throw Error(ErrorKind::invalid_multicurve, "grafting_holonomy", tag + " crosses an unknown generator");
        }
        if (x.sign != 1 && x.sign != -1) {
          throw Error(ErrorKind::invalid_multicurve, "grafting_holonomy", tag + " has a crossing sign other than +-1");
        }
      }
    }
  }
};

// Bending cocycle of a measured multicurve over rho.  beta(x, y) bends along
// the lifts crossed on the way from x to y; on orbit points x = u x0,
// beta(u x0, v x0) = rho(u) bend(u^-1 v) rho(u)^-1 with bend(w) = beta(x0, w x0).
class BendingCocycle {
 public:
  struct Record {
    std::size_t curve;
    int sign;
    Word conjugator;
  };

  // `orientation` = +1 rotates by +t about the oriented axis, -1 the other way.
  BendingCocycle(const HolonomyRep& rho, const MeasuredMulticurve& lambda, int orientation = 1)
      : rho_(rho), lambda_(lambda), orientation_(orientation) {
    if (orientation != 1 && orientation != -1) {
      throw Error(ErrorKind::out_of_domain, "grafting_holonomy", "orientation must be +1 or -1");
    }
    lambda_.validate(rho_.presentation());
    for (std::size_t i = 0; i < lambda_.curves.size(); ++i) {
      try {
        axes_.push_back(geom::oriented_axis(rho_.eval(lambda_.curves[i].word)));
      } catch (const Error& e) {
        throw Error(ErrorKind::invalid_multicurve, "grafting_holonomy",
                    "curve " + std::to_string(i) + " (" + rho_.presentation().to_string(lambda_.curves[i].word) +
                        ") has no hyperbolic axis");
      }
    }
    const std::size_t n = rho_.presentation().size();
    forward_.resize(n);
    backward_.resize(n);
    for (std::size_t g = 0; g < n; ++g) {
      MoebiusMap b;
      for (const auto& r : letter_records({static_cast<int>(g), false}, {})) b = b * rotation(r);
      forward_[g] = b;
      const MoebiusMap& m = rho_.image(static_cast<int>(g));
      backward_[g] = m.inverse() * b.inverse() * m;
    }
  }

  const std::array<SpherePoint, 2>& axis(std::size_t curve) const { return axes_.at(curve); }

  // Elliptic rotation for one crossing.  Conjugating the rotation about the
  // base axis stays accurate for lifts whose endpoints nearly coincide.
  MoebiusMap rotation(const Record& r) const {
    const MoebiusMap c = rho_.eval(r.conjugator);
    const auto& ax = axes_[r.curve];
    const MoebiusMap base =
        geom::elliptic_about_axis(ax[0], ax[1], orientation_ * r.sign * lambda_.curves[r.curve].weight);
    return c * base * c.inverse();
  }

  // Ordered crossings met along the word, each locating its lift.
  std::vector<Record> crossings(const Word& w) const {
    std::vector<Record> out;
    Word prefix;
    for (const Letter& l : w) {
      const auto recs = letter_records(l, prefix);
      out.insert(out.end(), recs.begin(), recs.end());
      prefix.push_back(l);
    }
    return out;
  }

  // beta(x0, w x0).
  MoebiusMap bend(const Word& w) const {
    MoebiusMap acc, prefix;
    for (const Letter& l : w) {
      const MoebiusMap& b = l.inverse ? backward_[l.gen] : forward_[l.gen];
      acc = acc * prefix * b * prefix.inverse();
      prefix = prefix * (l.inverse ? rho_.image(l.gen).inverse() : rho_.image(l.gen));
    }
    return acc;
  }

  // beta(u x0, v x0).
  MoebiusMap beta(const Word& u, const Word& v) const {
    const MoebiusMap ru = rho_.eval(u);
    return ru * bend(concat(inverse(u), v)) * ru.inverse();
  }

 private:
  std::vector<Record> letter_records(const Letter& l, const Word& prefix) const {
    struct Hit {
      double position;
      Record rec;
    };
    std::vector<Hit> hits;
    for (std::size_t i = 0; i < lambda_.curves.size(); ++i) {
      for (const auto& x : lambda_.curves[i].crossings) {
        if (x.generator == l.gen) hits.push_back({x.position, {i, x.sign, x.conjugator}});
      }
    }
    std::stable_sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) { return a.position < b.position; });
    std::vector<Record> out;
    if (!l.inverse) {
      for (auto& h : hits) out.push_back({h.rec.curve, h.rec.sign, concat(prefix, h.rec.conjugator)});
    } else {
      // Walking g^-1 meets the crossings of g in reverse from the far end.
      const Word back = concat(prefix, Word{l});
      for (auto it = hits.rbegin(); it != hits.rend(); ++it) {
        out.push_back({it->rec.curve, -it->rec.sign, concat(back, it->rec.conjugator)});
      }
    }
    return out;
  }

  HolonomyRep rho_;
  MeasuredMulticurve lambda_;
  int orientation_;
  std::vector<std::array<SpherePoint, 2>> axes_;
  std::vector<MoebiusMap> forward_, backward_;
};

// rho_lambda(g) = beta(x0, g x0) rho(g) on generators.
inline HolonomyRep graft_holonomy(const HolonomyRep& rho, const MeasuredMulticurve& lambda, int orientation = 1,
                                  const RepTolerances& tol = {}) {
  if (rho.kind() != RepKind::fuchsian) {
    throw Error(ErrorKind::invalid_representation, "grafting_holonomy", "grafting needs a fuchsian representation");
  }
  rho.validate(tol);
  const BendingCocycle beta(rho, lambda, orientation);
  std::vector<MoebiusMap> out;
  for (std::size_t g = 0; g < rho.presentation().size(); ++g) {
    const Letter l{static_cast<int>(g), false};
    out.push_back(beta.bend({l}) * rho.image(l.gen));
  }
  HolonomyRep grafted(rho.presentation(), std::move(out), rho.cone_angles(), RepKind::complex);
  const double rel = grafted.relation_defect();
  if (rel > tol.relation) {
    throw Error(ErrorKind::invalid_multicurve, "grafting_holonomy",
                "crossing records are inconsistent with the relation (defect " + num(rel) + ")");
  }
  grafted.validate(tol);
  return grafted;
}

// Module l/alpha of the grafting annulus.
inline double annulus_module(double length, double weight) {
  if (!(length > 0.0) || !(weight > 0.0)) {
    throw Error(ErrorKind::out_of_domain, "grafting_holonomy", "length and weight must be positive");
  }
  return length / weight;
}

// Ratio of the boundary lengths cosh(r) l and sinh(r) alpha of the equidistant annulus.
inline double equidistant_annulus_ratio(double length, double weight, double r) {
  if (!(r > 0.0)) throw Error(ErrorKind::out_of_domain, "grafting_holonomy", "distance must be positive");
  return annulus_module(length, weight) / std::tanh(r);
}

}  // namespace hyperend::grafting
