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
#include "evg/variation.hpp"

#include <algorithm>
#include <array>
#include <numbers>

#include <fmt/format.h>

#include "evg/error.hpp"
#include "evg/parallel.hpp"
#include "evg/rng.hpp"

namespace evg {

constexpr double kSphereTolerance = 1e-9;

LatentDomain LatentDomain::box(std::vector<Interval> bounds) {
  if (bounds.empty()) throw InvalidArgument("box domain needs at least one dimension");
  for (const auto &b : bounds) {
    if (!(b.lo < b.hi)) {
      throw InvalidArgument(fmt::format("box bound [{}, {}] is empty", b.lo, b.hi));
    }
  }
  const int dim = static_cast<int>(bounds.size());
  return LatentDomain(DomainKind::kBox, dim, std::move(bounds));
}

LatentDomain LatentDomain::unit_sphere(int dim) {
  if (dim < 2) throw InvalidArgument("unit sphere domain needs dim >= 2");
  return LatentDomain(DomainKind::kUnitSphere, dim, {});
}

bool LatentDomain::contains(std::span<const double> z) const {
  if (z.size() != static_cast<std::size_t>(dim_)) return false;
  if (kind_ == DomainKind::kBox) {
    return std::all_of(z.begin(), z.end(), [](double c) { return c >= -1.0 && c <= 1.0; });
  }
  double norm2 = 0.0;
  for (double c : z) {
    if (!std::isfinite(c)) return false;
    norm2 += c * c;
  }
  return std::abs(std::sqrt(norm2) - 1.0) <= kSphereTolerance;
}

std::vector<double> LatentDomain::to_physical(std::span<const double> z) const {
  if (kind_ == DomainKind::kUnitSphere) return {z.begin(), z.end()};
  std::vector<double> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    out[i] = bounds_[i].lo + (z[i] + 1.0) / 2.0 * (bounds_[i].hi - bounds_[i].lo);
  }
  return out;
}

std::vector<double> LatentDomain::to_normalized(std::span<const double> physical) const {
  if (kind_ == DomainKind::kUnitSphere) return {physical.begin(), physical.end()};
  std::vector<double> out(physical.size());
  for (std::size_t i = 0; i < physical.size(); ++i) {
    out[i] = 2.0 * (physical[i] - bounds_[i].lo) / (bounds_[i].hi - bounds_[i].lo) - 1.0;
  }
  return out;
}

LatentCode sample_uniform(const LatentDomain &domain, std::uint64_t seed) {
  Rng rng(seed);
  return sample_uniform(domain, rng);
}

void VariationModel::check_code(const LatentCode &z) const {
  if (!domain().contains(z.coords)) {
    throw DomainError(fmt::format("latent code outside the {} domain (dim {})", name(), domain().dim()));
  }
}

ImageSample VariationModel::generate(const LatentCode &z) const {
  check_code(z);
  return generate_unchecked(z);
}

std::vector<ImageSample> VariationModel::generate_batch(std::span<const LatentCode> codes) const {
  for (const auto &z : codes) check_code(z);
  std::vector<ImageSample> out(codes.size());
  parallel_for(codes.size(), [&](std::size_t i) { out[i] = generate_unchecked(codes[i]); });
  return out;
}

// ---------------------------------------------------------------------------
// Affine

ImageSample apply_affine(const ImageSample &base, const AffineParams &p) {
  const Shape s = base.shape();
  const double cx = (s.width - 1) / 2.0;
  const double cy = (s.height - 1) / 2.0;
  const double theta = p.angle_deg * std::numbers::pi / 180.0;
  const double cos_t = std::cos(theta);
  const double sin_t = std::sin(theta);
  const double shear = std::tan(p.shear_deg * std::numbers::pi / 180.0);
  const double inv_scale = 1.0 / p.scale;

  std::vector<float> out(s.size(), 0.0f);
  const auto in = base.data();
  const auto fetch = [&](int row, int col, int ch) -> double {
    if (row < 0 || row >= s.height || col < 0 || col >= s.width) return 0.0;
    return in[(static_cast<std::size_t>(row) * s.width + col) * s.channels + ch];
  };

  for (int row = 0; row < s.height; ++row) {
    for (int col = 0; col < s.width; ++col) {
      // Undo translation, then rotation, shear and scale about the center.
      double x = col - p.translate_x - cx;
      double y = row - p.translate_y - cy;
      const double rx = x * cos_t - y * sin_t;
      const double ry = x * sin_t + y * cos_t;
      x = (rx - shear * ry) * inv_scale + cx;
      y = ry * inv_scale + cy;

      const double x0 = std::floor(x);
      const double y0 = std::floor(y);
      const double fx = x - x0;
      const double fy = y - y0;
      const int c0 = static_cast<int>(x0);
      const int r0 = static_cast<int>(y0);
      if (r0 < -1 || r0 >= s.height || c0 < -1 || c0 >= s.width) continue;
      for (int ch = 0; ch < s.channels; ++ch) {
        double v = (1.0 - fy) * ((1.0 - fx) * fetch(r0, c0, ch));
        if (fx != 0.0) v += (1.0 - fy) * (fx * fetch(r0, c0 + 1, ch));
        if (fy != 0.0) {
          v += fy * ((1.0 - fx) * fetch(r0 + 1, c0, ch));
          if (fx != 0.0) v += fy * (fx * fetch(r0 + 1, c0 + 1, ch));
        }
        out[(static_cast<std::size_t>(row) * s.width + col) * s.channels + ch] = static_cast<float>(v);
      }
    }
  }
  return ImageSample(s, std::move(out));
}

const std::vector<Interval> &AffineModel::physical_bounds() {
  static const std::vector<Interval> bounds = {
      {-45.0, 45.0},  // angle, degrees
      {-10.0, 10.0},  // translate x, pixels
      {-10.0, 10.0},  // translate y, pixels
      {0.9, 1.5},     // scale
      {-30.0, 30.0},  // shear x, degrees
  };
  return bounds;
}

AffineModel::AffineModel(ImageSample base)
    : base_(std::move(base)), domain_(LatentDomain::box(physical_bounds())) {
  if (base_.size() == 0) throw InvalidArgument("affine model needs a base sample");
}

AffineParams AffineModel::params(const LatentCode &z) const {
  const auto v = domain_.to_physical(z.coords);
  return AffineParams{v[0], v[1], v[2], v[3], v[4]};
}

std::optional<LatentCode> AffineModel::identity_code() const {
  const std::array<double, 5> identity = {0.0, 0.0, 0.0, 1.0, 0.0};
  return LatentCode{domain_.to_normalized(identity)};
}

ImageSample AffineModel::generate_unchecked(const LatentCode &z) const {
  return apply_affine(base_, params(z));
}

// ---------------------------------------------------------------------------
// Color

namespace {

double gray(double r, double g, double b) { return 0.299 * r + 0.587 * g + 0.114 * b; }

double blend(double a, double t, double f) { return std::clamp(f * a + (1.0 - f) * t, 0.0, 1.0); }

void rgb_to_hsv(double r, double g, double b, double &h, double &s, double &v) {
  const double maxc = std::max({r, g, b});
  const double minc = std::min({r, g, b});
  const double cr = maxc - minc;
  v = maxc;
  s = maxc > 0.0 ? cr / maxc : 0.0;
  if (cr == 0.0) {
    h = 0.0;
    return;
  }
  if (maxc == r) {
    h = (g - b) / cr;
  } else if (maxc == g) {
    h = (b - r) / cr + 2.0;
  } else {
    h = (r - g) / cr + 4.0;
  }
  h /= 6.0;
  h -= std::floor(h);
}

void hsv_to_rgb(double h, double s, double v, double &r, double &g, double &b) {
  const double h6 = h * 6.0;
  const double i = std::floor(h6);
  const double f = h6 - i;
  const double p = v * (1.0 - s);
  const double q = v * (1.0 - s * f);
  const double t = v * (1.0 - s * (1.0 - f));
  switch (static_cast<int>(i) % 6) {
    case 0: r = v; g = t; b = p; break;
    case 1: r = q; g = v; b = p; break;
    case 2: r = p; g = v; b = t; break;
    case 3: r = p; g = q; b = v; break;
    case 4: r = t; g = p; b = v; break;
    default: r = v; g = p; b = q; break;
  }
}

}  // namespace

ImageSample apply_color(const ImageSample &base, const ColorParams &p) {
  const Shape s = base.shape();
  const std::size_t pixels = static_cast<std::size_t>(s.height) * s.width;
  const bool rgb = s.channels == 3;
  std::vector<double> x(base.data().begin(), base.data().end());

  for (double &v : x) v = std::clamp(v * p.brightness, 0.0, 1.0);

  double mean = 0.0;
  if (rgb) {
    for (std::size_t i = 0; i < pixels; ++i) mean += gray(x[3 * i], x[3 * i + 1], x[3 * i + 2]);
    mean /= static_cast<double>(pixels);
  } else {
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
  }
  for (double &v : x) v = blend(v, mean, p.contrast);

  if (rgb) {
    for (std::size_t i = 0; i < pixels; ++i) {
      const double g = gray(x[3 * i], x[3 * i + 1], x[3 * i + 2]);
      for (int c = 0; c < 3; ++c) x[3 * i + c] = blend(x[3 * i + c], g, p.saturation);
    }
    // A zero shift is skipped so the identity adjustment is exact.
    if (p.hue != 0.0) {
      for (std::size_t i = 0; i < pixels; ++i) {
        double h, sat, val;
        rgb_to_hsv(x[3 * i], x[3 * i + 1], x[3 * i + 2], h, sat, val);
        h += p.hue;
        h -= std::floor(h);
        hsv_to_rgb(h, sat, val, x[3 * i], x[3 * i + 1], x[3 * i + 2]);
        for (int c = 0; c < 3; ++c) x[3 * i + c] = std::clamp(x[3 * i + c], 0.0, 1.0);
      }
    }
  }

  std::vector<float> out(x.size());
  std::transform(x.begin(), x.end(), out.begin(), [](double v) { return static_cast<float>(v); });
  return ImageSample(s, std::move(out));
}

const std::vector<Interval> &ColorModel::physical_bounds() {
  static const std::vector<Interval> bounds = {
      {0.5, 1.5},   // brightness
      {0.5, 1.5},   // contrast
      {0.0, 2.0},   // saturation
      {-0.5, 0.5},  // hue
  };
  return bounds;
}

ColorModel::ColorModel(ImageSample base)
    : base_(std::move(base)), domain_(LatentDomain::box(physical_bounds())) {
  if (base_.size() == 0) throw InvalidArgument("color model needs a base sample");
}

ColorParams ColorModel::params(const LatentCode &z) const {
  const auto v = domain_.to_physical(z.coords);
  return ColorParams{v[0], v[1], v[2], v[3]};
}

std::optional<LatentCode> ColorModel::identity_code() const {
  const std::array<double, 4> identity = {1.0, 1.0, 1.0, 0.0};
  return LatentCode{domain_.to_normalized(identity)};
}

ImageSample ColorModel::generate_unchecked(const LatentCode &z) const {
  return apply_color(base_, params(z));
}

std::unique_ptr<VariationModel> make_affine_model(ImageSample base) {
  return std::make_unique<AffineModel>(std::move(base));
}

std::unique_ptr<VariationModel> make_color_model(ImageSample base) {
  return std::make_unique<ColorModel>(std::move(base));
}

}  // namespace evg
