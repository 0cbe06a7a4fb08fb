#ifndef AUFUSE_IO_UTIL_HPP
#define AUFUSE_IO_UTIL_HPP

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace aufuse {

/// Reads a whole file; throws std::runtime_error with the path on failure.
std::string read_file(const std::filesystem::path& path);

/// Writes content to a sibling temp file and renames it into place, so the
/// destination is never observed half-written.
void atomic_write_file(const std::filesystem::path& path, const std::string& content);

/// Collects output files and publishes them all at commit() time. Without a
/// commit, temp files are removed on destruction, leaving no partial
/// outputs behind after a failure.
class OutputStager {
  public:
    OutputStager() = default;
    ~OutputStager();
    OutputStager(const OutputStager&) = delete;
    OutputStager& operator=(const OutputStager&) = delete;

    void add(const std::filesystem::path& path, const std::string& content);
    void commit();

  private:
    std::vector<std::pair<std::filesystem::path, std::filesystem::path>> staged_;  // temp -> final
};

/// Formats a double with 17 significant digits in scientific form; parses
/// back to the exact same bits. Locale-independent.
std::string format_probability(double value);

/// Shortest decimal form that round-trips the double (for readable fields
/// like fps or metric values).
std::string format_double(double value);

} // namespace aufuse

#endif // AUFUSE_IO_UTIL_HPP
