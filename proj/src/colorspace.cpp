#include "palette_forge/colorspace.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <tuple>

#include "palette_forge/error.hpp"

namespace palette_forge {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

// sRGB primaries, D65 reference white (IEC 61966-2-1 as tabulated by CIE).
constexpr std::array<std::array<double, 3>, 3> kRgbToXyz = {{
    {0.412453, 0.357580, 0.180423},
    {0.212671, 0.715160, 0.072169},
    {0.019334, 0.119193, 0.950227},
}};
constexpr double kWhiteX = 0.95047;
constexpr double kWhiteY = 1.0;
constexpr double kWhiteZ = 1.08883;

// Rounded CIE constants, as used by scikit-image, so results agree with it to the last bits.
constexpr double kLabEpsilon = 0.008856;
constexpr double kLabSlope = 7.787;

double srgb_to_linear(double c) {
  return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double lab_f(double t) {
  return t > kLabEpsilon ? std::cbrt(t) : kLabSlope * t + 16.0 / 116.0;
}

double hue_degrees(double b, double a) {
  if (a == 0.0 && b == 0.0) return 0.0;
  double h = std::atan2(b, a) * kRadToDeg;
  return h < 0.0 ? h + 360.0 : h;
}

double pow7(double x) {
  const double x2 = x * x;
  const double x3 = x2 * x;
  return x3 * x3 * x;
}

int hex_digit(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

void DistanceParams::validate() const {
  if (!(std::isfinite(threshold) && threshold > 0.0)) {
    throw Error("distance threshold must be a positive finite number");
  }
  if (!(std::isfinite(sharpen_exponent) && sharpen_exponent > 0.0)) {
    throw Error("sharpen exponent must be a positive finite number");
  }
}

ColorHsv rgb_to_hsv(const ColorRgb& c) {
  const double max = std::max({c.r, c.g, c.b});
  const double min = std::min({c.r, c.g, c.b});
  const double delta = max - min;

  ColorHsv out{0.0, 0.0, max};
  if (delta <= 0.0) return out;

  out.s = max > 0.0 ? delta / max : 0.0;
  double h;
  if (max == c.r) {
    h = (c.g - c.b) / delta;
  } else if (max == c.g) {
    h = (c.b - c.r) / delta + 2.0;
  } else {
    h = (c.r - c.g) / delta + 4.0;
  }
  h *= 60.0;
  if (h < 0.0) h += 360.0;
  // -tiny + 360 can round up to exactly 360
  if (h >= 360.0) h = 0.0;
  out.h = h;
  return out;
}

ColorRgb hsv_to_rgb(const ColorHsv& c) {
  if (c.s <= 0.0) return {c.v, c.v, c.v};
  double h = std::fmod(c.h, 360.0);
  if (h < 0.0) h += 360.0;
  h /= 60.0;
  const int sector = std::min(static_cast<int>(h), 5);
  const double f = h - sector;
  const double p = c.v * (1.0 - c.s);
  const double q = c.v * (1.0 - c.s * f);
  const double t = c.v * (1.0 - c.s * (1.0 - f));
  switch (sector) {
    case 0: return {c.v, t, p};
    case 1: return {q, c.v, p};
    case 2: return {p, c.v, t};
    case 3: return {p, q, c.v};
    case 4: return {t, p, c.v};
    default: return {c.v, p, q};
  }
}

ColorLab rgb_to_lab(const ColorRgb& c) {
  const std::array<double, 3> lin = {srgb_to_linear(c.r), srgb_to_linear(c.g), srgb_to_linear(c.b)};
  std::array<double, 3> xyz{};
  for (std::size_t row = 0; row < 3; ++row) {
    xyz[row] = kRgbToXyz[row][0] * lin[0] + kRgbToXyz[row][1] * lin[1] + kRgbToXyz[row][2] * lin[2];
  }
  const double fx = lab_f(xyz[0] / kWhiteX);
  const double fy = lab_f(xyz[1] / kWhiteY);
  const double fz = lab_f(xyz[2] / kWhiteZ);
  return {116.0 * fy - 16.0, 500.0 * (fx - fy), 200.0 * (fy - fz)};
}

double ciede2000(const ColorLab& x, const ColorLab& y) {
  // Canonical argument order makes the result bit-exactly symmetric.
  const bool swap = std::tie(y.L, y.a, y.b) < std::tie(x.L, x.a, x.b);
  const ColorLab& c1 = swap ? y : x;
  const ColorLab& c2 = swap ? x : y;

  const double c1_ab = std::hypot(c1.a, c1.b);
  const double c2_ab = std::hypot(c2.a, c2.b);
  const double c_bar7 = pow7((c1_ab + c2_ab) / 2.0);
  const double g = 0.5 * (1.0 - std::sqrt(c_bar7 / (c_bar7 + pow7(25.0))));

  const double a1p = (1.0 + g) * c1.a;
  const double a2p = (1.0 + g) * c2.a;
  const double c1p = std::hypot(a1p, c1.b);
  const double c2p = std::hypot(a2p, c2.b);
  const double h1p = hue_degrees(c1.b, a1p);
  const double h2p = hue_degrees(c2.b, a2p);

  const double delta_lp = c2.L - c1.L;
  const double delta_cp = c2p - c1p;
  const double cp_product = c1p * c2p;

  double delta_hp = 0.0;
  if (cp_product != 0.0) {
    delta_hp = h2p - h1p;
    if (delta_hp > 180.0) {
      delta_hp -= 360.0;
    } else if (delta_hp < -180.0) {
      delta_hp += 360.0;
    }
  }
  const double delta_big_hp = 2.0 * std::sqrt(cp_product) * std::sin(delta_hp * kDegToRad / 2.0);

  const double l_bar = (c1.L + c2.L) / 2.0;
  const double c_bar_p = (c1p + c2p) / 2.0;
  double h_bar_p = h1p + h2p;
  if (cp_product != 0.0) {
    if (std::abs(h1p - h2p) <= 180.0) {
      h_bar_p = (h1p + h2p) / 2.0;
    } else if (h1p + h2p < 360.0) {
      h_bar_p = (h1p + h2p + 360.0) / 2.0;
    } else {
      h_bar_p = (h1p + h2p - 360.0) / 2.0;
    }
  }

  const double t = 1.0 - 0.17 * std::cos((h_bar_p - 30.0) * kDegToRad) +
                   0.24 * std::cos(2.0 * h_bar_p * kDegToRad) +
                   0.32 * std::cos((3.0 * h_bar_p + 6.0) * kDegToRad) -
                   0.20 * std::cos((4.0 * h_bar_p - 63.0) * kDegToRad);
  const double delta_theta = 30.0 * std::exp(-std::pow((h_bar_p - 275.0) / 25.0, 2.0));
  const double c_bar_p7 = pow7(c_bar_p);
  const double r_c = 2.0 * std::sqrt(c_bar_p7 / (c_bar_p7 + pow7(25.0)));
  const double l_offset = (l_bar - 50.0) * (l_bar - 50.0);
  const double s_l = 1.0 + 0.015 * l_offset / std::sqrt(20.0 + l_offset);
  const double s_c = 1.0 + 0.045 * c_bar_p;
  const double s_h = 1.0 + 0.015 * c_bar_p * t;
  const double r_t = -std::sin(2.0 * delta_theta * kDegToRad) * r_c;

  const double tl = delta_lp / s_l;
  const double tc = delta_cp / s_c;
  const double th = delta_big_hp / s_h;
  return std::sqrt(std::max(0.0, tl * tl + tc * tc + th * th + r_t * tc * th));
}

double thresholded_distance(const ColorLab& x, const ColorLab& y, const DistanceParams& params) {
  const double clipped = std::min(ciede2000(x, y), params.threshold) / params.threshold;
  if (params.sharpen_exponent == 1.0) return clipped;
  return std::pow(clipped, params.sharpen_exponent);
}

std::string to_hex(const ColorRgb& c) {
  static constexpr char kDigits[] = "0123456789ABCDEF";
  std::string out = "#";
  for (double channel : {c.r, c.g, c.b}) {
    const auto v = static_cast<int>(std::lround(std::clamp(channel, 0.0, 1.0) * 255.0));
    out.push_back(kDigits[v >> 4]);
    out.push_back(kDigits[v & 0xF]);
  }
  return out;
}

ColorRgb parse_hex(std::string_view text) {
  if (text.size() != 7 || text[0] != '#') {
    throw FormatError("invalid hex color '" + std::string(text) + "', expected #RRGGBB");
  }
  std::array<std::uint8_t, 3> channels{};
  for (std::size_t i = 0; i < 3; ++i) {
    const int hi = hex_digit(text[1 + 2 * i]);
    const int lo = hex_digit(text[2 + 2 * i]);
    if (hi < 0 || lo < 0) {
      throw FormatError("invalid hex color '" + std::string(text) + "', expected #RRGGBB");
    }
    channels[i] = static_cast<std::uint8_t>(hi * 16 + lo);
  }
  return rgb_from_u8(channels[0], channels[1], channels[2]);
}

}  // namespace palette_forge
