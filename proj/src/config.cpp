#include "spdcsim/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "spdcsim/errors.hpp"
#include "spdcsim/units.hpp"

namespace spdcsim {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  T value{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError(fmt::format("{}: cannot parse '{}' as a number", key, text));
  }
  return value;
}

template <class T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(parse_number<T>(key, item));
  }
  return out;
}

template <class T>
std::string format_list(const std::vector<T>& v) {
  return fmt::format("{}", fmt::join(v, ", "));
}

std::string polarization_name(Polarization p) { return p == Polarization::ordinary ? "ordinary" : "extraordinary"; }

Polarization parse_polarization(const std::string& key, const std::string& s) {
  if (s == "ordinary") return Polarization::ordinary;
  if (s == "extraordinary") return Polarization::extraordinary;
  throw ConfigError(fmt::format("{}: expected ordinary or extraordinary, got '{}'", key, s));
}

std::string shape_name(FilterShape s) { return s == FilterShape::gaussian ? "gaussian" : "tophat"; }

FilterShape parse_shape(const std::string& key, const std::string& s) {
  if (s == "gaussian") return FilterShape::gaussian;
  if (s == "tophat") return FilterShape::tophat;
  throw ConfigError(fmt::format("{}: expected gaussian or tophat, got '{}'", key, s));
}

std::string accidental_name(AccidentalModel m) { return m == AccidentalModel::none ? "none" : "rate_product"; }

AccidentalModel parse_accidental(const std::string& key, const std::string& s) {
  if (s == "none") return AccidentalModel::none;
  if (s == "rate_product") return AccidentalModel::rate_product;
  throw ConfigError(fmt::format("{}: expected none or rate_product, got '{}'", key, s));
}

struct Field {
  std::string section;
  std::string key;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

#define SPDC_NUMBER(SEC, KEY, MEMBER, TYPE)                                                         \
  Field {                                                                                           \
    SEC, KEY, [](const ExperimentConfig& c) { return fmt::format("{}", c.MEMBER); },                \
        [](ExperimentConfig& c, const std::string& v) { c.MEMBER = parse_number<TYPE>(SEC "." KEY, v); } \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      SPDC_NUMBER("crystal", "length_mm", crystal.length_mm, double),
      SPDC_NUMBER("crystal", "cut_angle_deg", crystal.cut_angle_deg, double),
      {"crystal", "dispersion", [](const ExperimentConfig& c) { return c.crystal.dispersion; },
       [](ExperimentConfig& c, const std::string& v) { c.crystal.dispersion = v; }},
      {"crystal", "signal_polarization",
       [](const ExperimentConfig& c) { return polarization_name(c.crystal.signal_polarization); },
       [](ExperimentConfig& c, const std::string& v) {
         c.crystal.signal_polarization = parse_polarization("crystal.signal_polarization", v);
       }},
      SPDC_NUMBER("pump", "wavelength_nm", pump.wavelength_nm, double),
      SPDC_NUMBER("pump", "waist_um", pump.waist_um, double),
      SPDC_NUMBER("filter", "center_nm", filter.center_nm, double),
      SPDC_NUMBER("filter", "fwhm_nm", filter.fwhm_nm, double),
      {"filter", "shape", [](const ExperimentConfig& c) { return shape_name(c.filter.shape); },
       [](ExperimentConfig& c, const std::string& v) { c.filter.shape = parse_shape("filter.shape", v); }},
      SPDC_NUMBER("array", "n_pixels", array.n_pixels, int),
      SPDC_NUMBER("array", "pitch_um", array.pitch_um, double),
      SPDC_NUMBER("array", "diameter_um", array.diameter_um, double),
      {"array", "dead_pixels", [](const ExperimentConfig& c) { return format_list(c.array.dead_pixels); },
       [](ExperimentConfig& c, const std::string& v) { c.array.dead_pixels = parse_list<int>("array.dead_pixels", v); }},
      SPDC_NUMBER("array", "dark_rate_hz", array.dark_rate_hz, double),
      SPDC_NUMBER("array", "reference_pixel", array.reference_pixel, double),
      SPDC_NUMBER("idler", "acceptance_sigma_mrad", idler.acceptance_sigma_mrad, double),
      SPDC_NUMBER("idler", "coupling_efficiency", idler.coupling_efficiency, double),
      SPDC_NUMBER("train", "focal_m", train.focal_m, double),
      SPDC_NUMBER("train", "p_m", train.p_m, double),
      SPDC_NUMBER("train", "q_m", train.q_m, double),
      SPDC_NUMBER("train", "wavelength_nm", train.wavelength_nm, double),
      {"sweep", "alpha_p_deg", [](const ExperimentConfig& c) { return format_list(c.sweep.alpha_p_deg); },
       [](ExperimentConfig& c, const std::string& v) { c.sweep.alpha_p_deg = parse_list<double>("sweep.alpha_p_deg", v); }},
      SPDC_NUMBER("sweep", "target_alpha_s_deg", sweep.target_alpha_s_deg, double),
      SPDC_NUMBER("sweep", "calibration_window_deg", sweep.calibration_window_deg, double),
      SPDC_NUMBER("acquisition", "duration_s", acquisition.duration_s, double),
      SPDC_NUMBER("acquisition", "pair_rate_hz", acquisition.pair_rate_hz, double),
      SPDC_NUMBER("acquisition", "seed", acquisition.seed, std::uint64_t),
      SPDC_NUMBER("coincidence", "window_ns", coincidence.window_ns, double),
      {"coincidence", "accidental_model",
       [](const ExperimentConfig& c) { return accidental_name(c.coincidence.accidental_model); },
       [](ExperimentConfig& c, const std::string& v) {
         c.coincidence.accidental_model = parse_accidental("coincidence.accidental_model", v);
       }},
      SPDC_NUMBER("coincidence", "spad_singles_hz", coincidence.spad_singles_hz, double),
      SPDC_NUMBER("coincidence", "spcm_singles_hz", coincidence.spcm_singles_hz, double),
      SPDC_NUMBER("integration", "relative_tolerance", integration.relative_tolerance, double),
      SPDC_NUMBER("integration", "absolute_floor", integration.absolute_floor, double),
      SPDC_NUMBER("integration", "frequency_span_fwhm", integration.frequency_span_fwhm, double),
      SPDC_NUMBER("integration", "idler_span_sigma", integration.idler_span_sigma, double),
      SPDC_NUMBER("integration", "numeric_frequency_span_fwhm", integration.numeric_frequency_span_fwhm, double),
  };
  return table;
}

#undef SPDC_NUMBER

}  // namespace

void ExperimentConfig::validate() const {
  crystal_spec().validate();
  if (!(pump.wavelength_nm > 0.0)) throw ConfigError("pump.wavelength_nm must be positive");
  if (!(pump.waist_um > 0.0)) throw ConfigError("pump.waist_um must be positive");
  filter_spec().validate();
  array_spec().validate();
  if (!(array.reference_pixel >= 0.0 && array.reference_pixel <= array.n_pixels - 1)) {
    throw ConfigError("array.reference_pixel must lie on the array");
  }
  idler_spec().validate();
  optical_train().validate();
  if (sweep.alpha_p_deg.empty()) throw ConfigError("sweep.alpha_p_deg must not be empty");
  for (std::size_t i = 1; i < sweep.alpha_p_deg.size(); ++i) {
    if (!(sweep.alpha_p_deg[i] > sweep.alpha_p_deg[i - 1])) {
      throw ConfigError("sweep.alpha_p_deg must be strictly increasing");
    }
  }
  if (!(sweep.calibration_window_deg > 0.0)) throw ConfigError("sweep.calibration_window_deg must be positive");
  if (!(acquisition.duration_s > 0.0)) throw ConfigError("acquisition.duration_s must be positive");
  if (!(acquisition.pair_rate_hz >= 0.0)) throw ConfigError("acquisition.pair_rate_hz must be nonnegative");
  coincidence_settings().validate();
  if (!(integration.relative_tolerance > 0.0 && integration.absolute_floor >= 0.0)) {
    throw ConfigError("integration tolerances must be positive");
  }
  if (integration.frequency_span_fwhm < 0.0 || !(integration.idler_span_sigma > 0.0) ||
      !(integration.numeric_frequency_span_fwhm > 0.0) || integration.numeric_frequency_span_fwhm > 5.0) {
    throw ConfigError("integration spans must be positive (numeric frequency span at most 5 FWHM)");
  }
}

CrystalSpec ExperimentConfig::crystal_spec() const {
  CrystalSpec spec;
  spec.length = crystal.length_mm * 1e-3;
  spec.cut_angle = deg_to_rad(crystal.cut_angle_deg);
  spec.dispersion = resolve_dispersion(crystal.dispersion);
  spec.signal_polarization = crystal.signal_polarization;
  return spec;
}

double ExperimentConfig::pump_frequency() const { return angular_frequency(pump.wavelength_nm * 1e-9); }

FilterSpec ExperimentConfig::filter_spec() const {
  const double center = filter.center_nm * 1e-9;
  return {angular_frequency(center), angular_bandwidth(center, filter.fwhm_nm * 1e-9), filter.shape};
}

SpadArraySpec ExperimentConfig::array_spec() const {
  return {array.n_pixels, array.pitch_um * 1e-6, array.diameter_um * 1e-6, array.dead_pixels, array.dark_rate_hz};
}

IdlerChannelSpec ExperimentConfig::idler_spec() const {
  IdlerChannelSpec s;
  s.angular_acceptance_sigma = idler.acceptance_sigma_mrad * 1e-3;
  s.coupling_efficiency = idler.coupling_efficiency;
  return s;
}

OpticalTrain ExperimentConfig::optical_train() const {
  return {train.focal_m, train.p_m, train.q_m, train.wavelength_nm * 1e-9};
}

CoincidenceSettings ExperimentConfig::coincidence_settings() const {
  return {coincidence.window_ns * 1e-9, coincidence.accidental_model, coincidence.spad_singles_hz,
          coincidence.spcm_singles_hz};
}

IntegrationSettings ExperimentConfig::integration_settings() const {
  IntegrationSettings s;
  s.frequency_span_fwhm = integration.frequency_span_fwhm;
  s.idler_span_sigma = integration.idler_span_sigma;
  s.numeric_frequency_span_fwhm = integration.numeric_frequency_span_fwhm;
  s.relative_tolerance = integration.relative_tolerance;
  s.absolute_floor = integration.absolute_floor;
  return s;
}

ExperimentConfig default_config() { return {}; }

ExperimentConfig parse_config(std::string_view text) {
  boost::property_tree::ptree tree;
  std::istringstream in{std::string(text)};
  try {
    boost::property_tree::read_ini(in, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(fmt::format("config syntax error at line {}: {}", e.line(), e.message()));
  }

  ExperimentConfig cfg = default_config();
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError(fmt::format("key '{}' outside any section", section));
    for (const auto& [key, value] : body) {
      const auto& table = fields();
      const auto it = std::find_if(table.begin(), table.end(),
                                   [&](const Field& f) { return f.section == section && f.key == key; });
      if (it == table.end()) throw ConfigError(fmt::format("unknown config key [{}] {}", section, key));
      it->set(cfg, trim(value.data()));
    }
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file {}", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::string out;
  std::string current;
  for (const auto& f : fields()) {
    if (f.section != current) {
      out += fmt::format("{}[{}]\n", current.empty() ? "" : "\n", f.section);
      current = f.section;
    }
    out += fmt::format("{} = {}\n", f.key, f.get(cfg));
  }
  return out;
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : serialize_config(cfg)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

}  // namespace spdcsim
