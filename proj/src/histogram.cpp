#include "spdcsim/histogram.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "spdcsim/errors.hpp"

namespace spdcsim {

void PixelHistogram::validate() const {
  if (counts.size() != live.size()) throw InputError("histogram counts and live mask differ in length");
  for (auto c : counts) {
    if (c < 0) throw InputError("histogram counts must be nonnegative");
  }
}

void write_csv(std::ostream& out, const PixelHistogram& h) {
  h.validate();
  fmt::print(out, "# alpha_p_deg={}\n# seed={}\n# duration_s={}\n# dead=", h.alpha_p_deg, h.seed, h.duration);
  bool first = true;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (h.live[i]) continue;
    fmt::print(out, "{}{}", first ? "" : ";", i);
    first = false;
  }
  out << "\npixel_index,counts\n";
  for (std::size_t i = 0; i < h.size(); ++i) fmt::print(out, "{},{}\n", i, h.counts[i]);
}

PixelHistogram read_csv(std::istream& in) {
  PixelHistogram h;
  std::vector<std::size_t> dead;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = line.substr(2, eq - 2);
      const std::string value = line.substr(eq + 1);
      try {
        if (key == "alpha_p_deg") h.alpha_p_deg = std::stod(value);
        else if (key == "seed") h.seed = std::stoull(value);
        else if (key == "duration_s") h.duration = std::stod(value);
        else if (key == "dead") {
          std::stringstream ss(value);
          std::string item;
          while (std::getline(ss, item, ';')) {
            if (!item.empty()) dead.push_back(std::stoul(item));
          }
        }
      } catch (const std::exception&) {
        throw InputError(fmt::format("malformed histogram header line: '{}'", line));
      }
      continue;
    }
    if (!header_seen) {
      if (line != "pixel_index,counts") throw InputError(fmt::format("unexpected histogram header '{}'", line));
      header_seen = true;
      continue;
    }
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw InputError(fmt::format("malformed histogram row '{}'", line));
    const auto index = std::stoul(line.substr(0, comma));
    if (index != h.counts.size()) throw InputError("histogram rows must be consecutive from pixel 0");
    h.counts.push_back(std::stoll(line.substr(comma + 1)));
  }
  h.live.assign(h.counts.size(), true);
  for (auto i : dead) {
    if (i >= h.size()) throw InputError("dead pixel index outside the histogram");
    h.live[i] = false;
  }
  h.validate();
  return h;
}

PixelHistogram read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(fmt::format("cannot open histogram file {}", path.string()));
  return read_csv(in);
}

}  // namespace spdcsim
