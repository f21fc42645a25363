#ifndef OPENMAP_IO_HPP
#define OPENMAP_IO_HPP

#include <cstdint>
#include <optional>
#include <string>

namespace openmap {

// All numeric fields in CSV/cache files are written with %.17g so identical
// runs are byte-identical.
std::string format_g17(double x);

void write_file(const std::string& path, const std::string& content);
std::optional<std::string> read_file(const std::string& path);
void ensure_dir(const std::string& path);

// Spectral-rate sentinel for total escape; never a float infinity on disk.
inline const char* kTotalEscapeToken = "TOTAL_ESCAPE";

}  // namespace openmap

#endif
