#pragma once

#include <complex>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "hyperend/core/error.hpp"
#include "hyperend/core/linalg.hpp"
#include "hyperend/fields/atlas.hpp"

namespace hyperend::fields {

using AtlasPtr = std::shared_ptr<const ChartAtlas>;

// Tags fix how a value is carried from donor coordinates to chart coordinates.
struct ScalarTag {
  static double pull(double v, const Mat2&) { return v; }
  static double zero() { return 0.0; }
};
struct MetricTag {
  static Mat2 pull(const Mat2& v, const Mat2& j) { return j.transpose() * v * j; }
  static Mat2 zero() { return Mat2::Zero(); }
};
struct OperatorTag {
  static Mat2 pull(const Mat2& v, const Mat2& j) { return j.inverse() * v * j; }
  static Mat2 zero() { return Mat2::Zero(); }
};
// Coefficient of a quadratic differential under a holomorphic coordinate change.
struct QuadraticTag {
  static std::complex<double> pull(std::complex<double> v, const Mat2& j) {
    const std::complex<double> dz(j(0, 0), j(1, 0));
    return v * dz * dz;
  }
  static std::complex<double> zero() { return {0.0, 0.0}; }
};

template <class Tag, class V>
class Field {
 public:
  using value_type = V;
  using tag_type = Tag;

  Field() = default;
  Field(AtlasPtr atlas, std::string role, std::vector<V> values)
      : atlas_(std::move(atlas)), role_(std::move(role)), values_(std::move(values)) {
    if (!atlas_ || values_.size() != atlas_->size()) {
      throw Error(ErrorKind::atlas_mismatch, "surface_fields", "field '" + role_ + "' does not match its atlas");
    }
  }
  Field(AtlasPtr atlas, std::string role, const V& fill)
      : Field(atlas, std::move(role), std::vector<V>(atlas ? atlas->size() : 0, fill)) {}

  // Evaluates fn(global_index) at every active sample; inactive samples hold zero.
  template <class Fn>
  static Field generate(AtlasPtr atlas, std::string role, Fn&& fn) {
    std::vector<V> values(atlas->size(), Tag::zero());
    for (std::size_t g = 0; g < atlas->size(); ++g) {
      if (atlas->active(g)) values[g] = fn(g);
    }
    return Field(std::move(atlas), std::move(role), std::move(values));
  }

  const AtlasPtr& atlas() const noexcept { return atlas_; }
  const std::string& role() const noexcept { return role_; }
  void set_role(std::string r) { role_ = std::move(r); }
  std::size_t size() const noexcept { return values_.size(); }
  const std::vector<V>& values() const noexcept { return values_; }
  std::vector<V>& values() noexcept { return values_; }
  const V& operator[](std::size_t g) const { return values_[g]; }
  V& operator[](std::size_t g) { return values_[g]; }

 private:
  AtlasPtr atlas_;
  std::string role_;
  std::vector<V> values_;
};

using ScalarField = Field<ScalarTag, double>;
using MetricField = Field<MetricTag, Mat2>;
using OperatorField = Field<OperatorTag, Mat2>;
using ComplexField = Field<QuadraticTag, std::complex<double>>;

inline void require_same_atlas(const AtlasPtr& a, const AtlasPtr& b) {
  if (a.get() != b.get()) {
    throw Error(ErrorKind::atlas_mismatch, "surface_fields", "fields live on different atlases");
  }
}

inline double norm_of(double v) { return std::abs(v); }
inline double norm_of(const Mat2& v) { return max_abs(v); }
inline double norm_of(std::complex<double> v) { return std::abs(v); }

// Overwrites fringe samples by donor interpolation until the values settle.
template <class Tag, class V>
void fill_fringe(std::vector<V>& values, const ChartAtlas& atlas) {
  std::vector<std::size_t> fringe;
  for (std::size_t g = 0; g < atlas.size(); ++g) {
    if (atlas.role(g) == SampleRole::fringe) fringe.push_back(g);
  }
  if (fringe.empty()) return;
  for (int sweep = 0; sweep < 200; ++sweep) {
    double change = 0.0;
    double scale = 0.0;
    for (std::size_t g : fringe) {
      const WeightList& w = *atlas.donor_weights(g);
      V acc = Tag::zero();
      for (const auto& [d, wt] : w) acc += wt * values[d];
      const V next = Tag::pull(acc, atlas.overlap_of(g)->jacobian);
      change = std::max(change, std::abs(norm_of(next - values[g])));
      scale = std::max(scale, std::abs(norm_of(next)));
      values[g] = next;
    }
    if (change <= 1e-15 * std::max(1.0, scale)) return;
  }
}

template <class Tag, class V>
void fill_fringe(Field<Tag, V>& f) {
  fill_fringe<Tag, V>(f.values(), *f.atlas());
}

}  // namespace hyperend::fields
