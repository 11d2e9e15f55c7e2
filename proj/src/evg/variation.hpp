/**
 * Copyright 2026 The EvG Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef EVG_VARIATION_HPP_
#define EVG_VARIATION_HPP_

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "evg/tensor_io.hpp"

namespace evg {

struct Interval {
  double lo;
  double hi;
};

enum class DomainKind { kBox, kUnitSphere };

// Compact latent space. Box domains are searched in normalized coordinates
// [-1,1]^dim; the physical value of coordinate i is lo + (z+1)/2 (hi-lo).
class LatentDomain {
 public:
  static LatentDomain box(std::vector<Interval> bounds);
  static LatentDomain unit_sphere(int dim);

  DomainKind kind() const { return kind_; }
  int dim() const { return dim_; }
  const std::vector<Interval> &bounds() const { return bounds_; }

  bool contains(std::span<const double> normalized) const;
  std::vector<double> to_physical(std::span<const double> normalized) const;
  std::vector<double> to_normalized(std::span<const double> physical) const;

 private:
  LatentDomain(DomainKind kind, int dim, std::vector<Interval> bounds)
      : kind_(kind), dim_(dim), bounds_(std::move(bounds)) {}

  DomainKind kind_;
  int dim_;
  std::vector<Interval> bounds_;
};

struct LatentCode {
  std::vector<double> coords;
  bool operator==(const LatentCode &) const = default;
};

// Box: uniform over [-1,1]^dim. Sphere: normalized standard Gaussian.
LatentCode sample_uniform(const LatentDomain &domain, std::uint64_t seed);
template <class Urng>
LatentCode sample_uniform(const LatentDomain &domain, Urng &rng);

enum class ModelKind { kAffine, kColor, kExternal };

// The generator g: latent code (plus, for instance-conditional models, a
// fixed base sample) to a sample in [0,1]^D.
class VariationModel {
 public:
  virtual ~VariationModel() = default;

  virtual ModelKind kind() const = 0;
  virtual std::string name() const = 0;
  virtual const LatentDomain &domain() const = 0;
  virtual Shape output_shape() const = 0;

  // The code reproducing the base sample, for instance-conditional models.
  virtual std::optional<LatentCode> identity_code() const { return std::nullopt; }

  // Throws DomainError if `z` lies outside domain().
  ImageSample generate(const LatentCode &z) const;
  virtual std::vector<ImageSample> generate_batch(std::span<const LatentCode> codes) const;

 protected:
  void check_code(const LatentCode &z) const;
  virtual ImageSample generate_unchecked(const LatentCode &z) const = 0;
};

struct AffineParams {
  double angle_deg = 0.0;
  double translate_x = 0.0;
  double translate_y = 0.0;
  double scale = 1.0;
  double shear_deg = 0.0;
};

struct ColorParams {
  double brightness = 1.0;
  double contrast = 1.0;
  double saturation = 1.0;
  double hue = 0.0;
};

// Forward map M = Translate o Rotate_c o ShearX_c o Scale_c about the image
// center c = ((w-1)/2, (h-1)/2). Each output pixel samples the base at
// M^-1(p) bilinearly; samples outside the image read as zero. Positive angles
// rotate counter-clockwise on screen.
ImageSample apply_affine(const ImageSample &base, const AffineParams &params);

// brightness, contrast, saturation, hue in that order; every step clamps.
ImageSample apply_color(const ImageSample &base, const ColorParams &params);

class AffineModel final : public VariationModel {
 public:
  static const std::vector<Interval> &physical_bounds();

  explicit AffineModel(ImageSample base);

  ModelKind kind() const override { return ModelKind::kAffine; }
  std::string name() const override { return "affine"; }
  const LatentDomain &domain() const override { return domain_; }
  Shape output_shape() const override { return base_.shape(); }
  std::optional<LatentCode> identity_code() const override;

  const ImageSample &base() const { return base_; }
  AffineParams params(const LatentCode &z) const;

 protected:
  ImageSample generate_unchecked(const LatentCode &z) const override;

 private:
  ImageSample base_;
  LatentDomain domain_;
};

class ColorModel final : public VariationModel {
 public:
  static const std::vector<Interval> &physical_bounds();

  explicit ColorModel(ImageSample base);

  ModelKind kind() const override { return ModelKind::kColor; }
  std::string name() const override { return "color"; }
  const LatentDomain &domain() const override { return domain_; }
  Shape output_shape() const override { return base_.shape(); }
  std::optional<LatentCode> identity_code() const override;

  const ImageSample &base() const { return base_; }
  ColorParams params(const LatentCode &z) const;

 protected:
  ImageSample generate_unchecked(const LatentCode &z) const override;

 private:
  ImageSample base_;
  LatentDomain domain_;
};

std::unique_ptr<VariationModel> make_affine_model(ImageSample base);
std::unique_ptr<VariationModel> make_color_model(ImageSample base);

// ---------------------------------------------------------------------------

template <class Urng>
LatentCode sample_uniform(const LatentDomain &domain, Urng &rng) {
  LatentCode z;
  z.coords.resize(static_cast<std::size_t>(domain.dim()));
  if (domain.kind() == DomainKind::kBox) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (double &c : z.coords) c = u(rng);
    return z;
  }
  std::normal_distribution<double> n(0.0, 1.0);
  double norm2 = 0.0;
  while (norm2 == 0.0) {
    norm2 = 0.0;
    for (double &c : z.coords) {
      c = n(rng);
      norm2 += c * c;
    }
  }
  const double inv = 1.0 / std::sqrt(norm2);
  for (double &c : z.coords) c *= inv;
  return z;
}

}  // namespace evg

#endif  // EVG_VARIATION_HPP_
