#include "spdcsim/dispersion.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "spdcsim/errors.hpp"

namespace spdcsim {

namespace detail {
extern const std::string_view kBuiltinEimerl1987;
extern const std::string_view kBuiltinKato1986;
}  // namespace detail

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

double to_number(const std::map<std::string, std::string>& kv, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw ConfigError(fmt::format("dispersion data: missing key '{}'", key));
  try {
    std::size_t used = 0;
    const double value = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(it->second);
    return value;
  } catch (const std::exception&) {
    throw ConfigError(fmt::format("dispersion data: '{}' is not a number ('{}')", key, it->second));
  }
}

SellmeierTerms read_terms(const std::map<std::string, std::string>& kv, const std::string& prefix) {
  return {to_number(kv, prefix + ".A"), to_number(kv, prefix + ".B"), to_number(kv, prefix + ".C"),
          to_number(kv, prefix + ".D")};
}

}  // namespace

double SellmeierTerms::index(double wavelength) const {
  const double l2 = (wavelength * 1e6) * (wavelength * 1e6);
  const double n2 = a + b / (l2 - c) - d * l2;
  return n2 > 0.0 ? std::sqrt(n2) : std::nan("");
}

double DispersionSet::principal_index(Polarization pol, double wavelength) const {
  if (!(wavelength >= min_wavelength && wavelength <= max_wavelength)) {
    throw DomainError(fmt::format("{}: wavelength {:.1f} nm outside [{:.0f}, {:.0f}] nm", name,
                                  wavelength * 1e9, min_wavelength * 1e9, max_wavelength * 1e9));
  }
  const double n = (pol == Polarization::ordinary ? ordinary : extraordinary).index(wavelength);
  if (!std::isfinite(n) || n <= 1.0) {
    throw DomainError(fmt::format("{}: non-physical index at {:.1f} nm", name, wavelength * 1e9));
  }
  return n;
}

DispersionSet parse_dispersion(std::string_view text) {
  std::map<std::string, std::string> kv;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string content = trim(line);
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(fmt::format("dispersion data line {}: expected 'key = value'", line_no));
    }
    kv[trim(std::string_view(content).substr(0, eq))] = trim(std::string_view(content).substr(eq + 1));
  }

  DispersionSet set;
  const auto name = kv.find("name");
  if (name == kv.end() || name->second.empty()) throw ConfigError("dispersion data: missing key 'name'");
  set.name = name->second;
  set.ordinary = read_terms(kv, "ordinary");
  set.extraordinary = read_terms(kv, "extraordinary");
  if (kv.contains("min_wavelength_nm")) set.min_wavelength = to_number(kv, "min_wavelength_nm") * 1e-9;
  if (kv.contains("max_wavelength_nm")) set.max_wavelength = to_number(kv, "max_wavelength_nm") * 1e-9;
  if (!(set.min_wavelength > 0.0 && set.min_wavelength < set.max_wavelength)) {
    throw ConfigError("dispersion data: invalid wavelength range");
  }
  return set;
}

DispersionSet load_dispersion_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open dispersion file '{}'", path.string()));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_dispersion(buffer.str());
}

DispersionSet builtin_dispersion(std::string_view name) {
  if (name == "bbo_eimerl1987") return parse_dispersion(detail::kBuiltinEimerl1987);
  if (name == "bbo_kato1986") return parse_dispersion(detail::kBuiltinKato1986);
  throw ConfigError(fmt::format("unknown built-in dispersion set '{}'", name));
}

DispersionSet resolve_dispersion(std::string_view source) {
  constexpr std::string_view prefix = "builtin:";
  if (source.starts_with(prefix)) return builtin_dispersion(source.substr(prefix.size()));
  return load_dispersion_file(std::filesystem::path(std::string(source)));
}

}  // namespace spdcsim
