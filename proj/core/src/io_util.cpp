#include "aufuse/io_util.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <system_error>

namespace aufuse {

namespace fs = std::filesystem;

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path.string() + ": cannot open for reading");
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw std::runtime_error(path.string() + ": read failed");
    return content;
}

namespace {

fs::path temp_sibling(const fs::path& path) {
    fs::path tmp = path;
    tmp += ".tmp";
    return tmp;
}

void write_all(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw std::runtime_error(path.string() + ": write failed");
}

} // namespace

void atomic_write_file(const fs::path& path, const std::string& content) {
    const fs::path tmp = temp_sibling(path);
    write_all(tmp, content);
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw std::runtime_error(path.string() + ": rename failed: " + ec.message());
    }
}

OutputStager::~OutputStager() {
    for (const auto& [tmp, final_path] : staged_) {
        std::error_code ec;
        fs::remove(tmp, ec);
    }
}

void OutputStager::add(const fs::path& path, const std::string& content) {
    const fs::path tmp = temp_sibling(path);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    write_all(tmp, content);
    staged_.emplace_back(tmp, path);
}

void OutputStager::commit() {
    for (const auto& [tmp, final_path] : staged_) {
        std::error_code ec;
        fs::rename(tmp, final_path, ec);
        if (ec) throw std::runtime_error(final_path.string() + ": rename failed: " + ec.message());
    }
    staged_.clear();
}

std::string format_probability(double value) {
    char buf[48];
    const auto result = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::scientific, 16);
    if (result.ec != std::errc{}) throw std::runtime_error("failed to format probability");
    return std::string(buf, result.ptr);
}

std::string format_double(double value) {
    char buf[48];
    const auto result = std::to_chars(buf, buf + sizeof(buf), value);
    if (result.ec != std::errc{}) throw std::runtime_error("failed to format number");
    return std::string(buf, result.ptr);
}

} // namespace aufuse
