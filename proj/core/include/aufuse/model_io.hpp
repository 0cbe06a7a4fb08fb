#ifndef AUFUSE_MODEL_IO_HPP
#define AUFUSE_MODEL_IO_HPP

#include <filesystem>
#include <string>

#include "aufuse/graph.hpp"

namespace aufuse {

/// Model files are a single JSON document, format_version "1", with fields
/// `variables` (name, cardinality, role), `intra_edges`, `inter_edges`
/// (pairs of names, inter sources living in slice t-1), and `cpts` /
/// `transition_cpts` (child, ordered parents, flat row-major table).
/// Previous-slice parents are spelled "prev:<name>". Probabilities are
/// written with 17 significant digits so serialization round-trips the
/// exact double values.
std::string model_to_json(const NetworkSpec& spec);
NetworkSpec parse_model_json(const std::string& text, const std::string& origin = "<memory>");

NetworkSpec load_model(const std::filesystem::path& path);
void save_model(const NetworkSpec& spec, const std::filesystem::path& path);

} // namespace aufuse

#endif // AUFUSE_MODEL_IO_HPP
