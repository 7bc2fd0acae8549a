#pragma once

#include <sstream>
#include <string>
#include <vector>

#include "hyperend/core/error.hpp"

namespace hyperend::grafting {

// Generator index with an inversion flag.
struct Letter {
  int gen = 0;
  bool inverse = false;

  Letter inverted() const { return {gen, !inverse}; }
  friend bool operator==(const Letter&, const Letter&) = default;
};

using Word = std::vector<Letter>;

inline Word inverse(const Word& w) {
  Word out;
  out.reserve(w.size());
  for (auto it = w.rbegin(); it != w.rend(); ++it) out.push_back(it->inverted());
  return out;
}

inline Word concat(Word a, const Word& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

// Free reduction: cancels adjacent x x^-1 pairs.
inline Word reduce(const Word& w) {
  Word out;
  for (const Letter& l : w) {
    if (!out.empty() && out.back() == l.inverted()) {
      out.pop_back();
    } else {
      out.push_back(l);
    }
  }
  return out;
}

// Generators a1, b1, ..., ag, bg followed by cone loops c1, ..., cn with the
// relation [a1,b1] ... [ag,bg] c1 ... cn = 1.
class SurfaceGroupPresentation {
 public:
  SurfaceGroupPresentation(int genus, std::vector<std::string> cone_loops) : genus_(genus), cones_(cone_loops.size()) {
    if (genus < 0) throw Error(ErrorKind::invalid_representation, "grafting_holonomy", "genus must be nonnegative");
    for (int i = 1; i <= genus; ++i) {
      names_.push_back("a" + std::to_string(i));
      names_.push_back("b" + std::to_string(i));
    }
    for (auto& c : cone_loops) names_.push_back(std::move(c));
    for (int i = 0; i < genus; ++i) {
      const Letter a{2 * i, false}, b{2 * i + 1, false};
      relation_.insert(relation_.end(), {a, b, a.inverted(), b.inverted()});
    }
    for (std::size_t j = 0; j < cones_; ++j) relation_.push_back({static_cast<int>(2 * genus + j), false});
    check_names();
  }

  // Presentation with explicit generator names and relation; the relation
  // must reduce to the standard product of commutators and cone loops.
  SurfaceGroupPresentation(int genus, std::vector<std::string> names, const std::string& relation)
      : genus_(genus), names_(std::move(names)) {
    if (genus < 0 || static_cast<int>(names_.size()) < 2 * genus) {
      throw Error(ErrorKind::invalid_representation, "grafting_holonomy", "too few generators for the genus");
    }
    cones_ = names_.size() - 2 * genus;
    check_names();
    relation_ = parse(relation);
    Word expected;
    for (int i = 0; i < genus; ++i) {
      const Letter a{2 * i, false}, b{2 * i + 1, false};
      expected.insert(expected.end(), {a, b, a.inverted(), b.inverted()});
    }
    for (std::size_t j = 0; j < cones_; ++j) expected.push_back({static_cast<int>(2 * genus + j), false});
    if (reduce(relation_) != expected) {
      throw Error(ErrorKind::invalid_representation, "grafting_holonomy",
                  "relation '" + relation + "' does not reduce to " + to_string(expected));
    }
  }

  int genus() const noexcept { return genus_; }
  std::size_t cone_count() const noexcept { return cones_; }
  std::size_t size() const noexcept { return names_.size(); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  const Word& relation() const noexcept { return relation_; }
  int cone_generator(std::size_t j) const { return static_cast<int>(2 * genus_ + j); }

  int index(const std::string& name) const {
    for (std::size_t i = 0; i < names_.size(); ++i) {
      if (names_[i] == name) return static_cast<int>(i);
    }
    throw Error(ErrorKind::parse_error, "grafting_holonomy", "unknown generator '" + name + "'");
  }

  // Whitespace-separated tokens; "x^-1" is the inverse of x.
  Word parse(const std::string& text) const {
    std::istringstream in(text);
    std::string tok;
    Word w;
    while (in >> tok) {
      bool inv = false;
      if (tok.size() > 3 && tok.compare(tok.size() - 3, 3, "^-1") == 0) {
        inv = true;
        tok.resize(tok.size() - 3);
      }
      w.push_back({index(tok), inv});
    }
    return w;
  }

  std::string to_string(const Word& w) const {
    std::string out;
    for (const Letter& l : w) {
      if (!out.empty()) out += ' ';
      out += names_[l.gen];
      if (l.inverse) out += "^-1";
    }
    return out;
  }

 private:
  void check_names() const {
    for (std::size_t i = 0; i < names_.size(); ++i) {
      if (names_[i].empty() || names_[i].find_first_of(" \t^") != std::string::npos) {
        throw Error(ErrorKind::invalid_representation, "grafting_holonomy", "bad generator name '" + names_[i] + "'");
      }
      for (std::size_t j = 0; j < i; ++j) {
        if (names_[i] == names_[j]) {
          throw Error(ErrorKind::invalid_representation, "grafting_holonomy", "duplicate generator '" + names_[i] + "'");
        }
      }
    }
  }

  int genus_ = 0;
  std::size_t cones_ = 0;
  std::vector<std::string> names_;
  Word relation_;
};

}  // namespace hyperend::grafting
