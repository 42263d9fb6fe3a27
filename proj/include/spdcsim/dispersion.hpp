#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace spdcsim {

enum class Polarization { ordinary, extraordinary };

/// n^2 = a + b / (lambda^2 - c) - d lambda^2, lambda in micrometres.
struct SellmeierTerms {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double d = 0.0;

  double index(double wavelength) const;
};

/// Named principal-index data of a uniaxial crystal.
struct DispersionSet {
  std::string name;
  SellmeierTerms ordinary;
  SellmeierTerms extraordinary;
  double min_wavelength = 350e-9;  // m
  double max_wavelength = 1100e-9;

  /// Principal index of the given polarization. Throws DomainError outside
  /// [min_wavelength, max_wavelength] or when the formula leaves n > 1.
  double principal_index(Polarization pol, double wavelength) const;
};

/// Parses `key = value` lines (`#` starts a comment). Required keys: name,
/// ordinary.{A,B,C,D}, extraordinary.{A,B,C,D}; optional min/max_wavelength_nm.
DispersionSet parse_dispersion(std::string_view text);
DispersionSet load_dispersion_file(const std::filesystem::path& path);

/// Sets compiled into the library from data/dispersion: "bbo_eimerl1987"
/// (default) and "bbo_kato1986".
DispersionSet builtin_dispersion(std::string_view name);

/// Resolves "builtin:<name>" or a file path.
DispersionSet resolve_dispersion(std::string_view source);

inline constexpr std::string_view kDefaultDispersion = "builtin:bbo_eimerl1987";

}  // namespace spdcsim
