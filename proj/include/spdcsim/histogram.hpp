#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace spdcsim {

/// Coincidence counts per SPAD pixel. `live[i] == false` marks a dead pixel,
/// which every fit ignores.
struct PixelHistogram {
  std::vector<std::int64_t> counts;
  std::vector<bool> live;
  double alpha_p_deg = 0.0;
  double duration = 0.0;  // s
  std::uint64_t seed = 0;

  std::size_t size() const { return counts.size(); }
  void validate() const;
};

/// CSV with `# key=value` header lines and `pixel_index,counts` rows. Dead
/// pixels are listed in a `# dead=` header line.
void write_csv(std::ostream& out, const PixelHistogram& h);
PixelHistogram read_csv(std::istream& in);
PixelHistogram read_csv(const std::filesystem::path& path);

}  // namespace spdcsim
