#include "aufuse/model_io.hpp"

#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "aufuse/io_util.hpp"

namespace aufuse {

using nlohmann::json;

namespace {

void append_escaped(std::string& out, const std::string& text) {
    out += '"';
    for (char c : text) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    out += '"';
}

void append_edges(std::string& out, const std::vector<Edge>& edges) {
    out += '[';
    for (std::size_t i = 0; i < edges.size(); ++i) {
        if (i) out += ',';
        out += '[';
        append_escaped(out, edges[i].first);
        out += ',';
        append_escaped(out, edges[i].second);
        out += ']';
    }
    out += ']';
}

void append_cpts(std::string& out, const std::vector<Cpt>& cpts) {
    out += '[';
    for (std::size_t i = 0; i < cpts.size(); ++i) {
        if (i) out += ',';
        const Cpt& cpt = cpts[i];
        out += "{\"child\":";
        append_escaped(out, cpt.child);
        out += ",\"parents\":[";
        for (std::size_t p = 0; p < cpt.parents.size(); ++p) {
            if (p) out += ',';
            append_escaped(out, cpt.parents[p].to_string());
        }
        out += "],\"table\":[";
        for (std::size_t t = 0; t < cpt.table.size(); ++t) {
            if (t) out += ',';
            out += format_probability(cpt.table[t]);
        }
        out += "]}";
    }
    out += ']';
}

[[noreturn]] void fail(const std::string& origin, const std::string& message) {
    throw std::runtime_error(origin + ": " + message);
}

std::vector<Edge> parse_edges(const json& node, const std::string& origin, const char* field) {
    std::vector<Edge> out;
    if (!node.is_array()) fail(origin, std::string(field) + " must be an array");
    for (const auto& entry : node) {
        if (!entry.is_array() || entry.size() != 2 || !entry[0].is_string() || !entry[1].is_string()) {
            fail(origin, std::string(field) + " entries must be [source, target] name pairs");
        }
        out.emplace_back(entry[0].get<std::string>(), entry[1].get<std::string>());
    }
    return out;
}

std::vector<Cpt> parse_cpts(const json& node, const std::string& origin, const char* field) {
    std::vector<Cpt> out;
    if (!node.is_array()) fail(origin, std::string(field) + " must be an array");
    for (const auto& entry : node) {
        Cpt cpt;
        if (!entry.is_object() || !entry.contains("child") || !entry.contains("parents") ||
            !entry.contains("table")) {
            fail(origin, std::string(field) + " entries need child, parents, table");
        }
        cpt.child = entry.at("child").get<std::string>();
        for (const auto& parent : entry.at("parents")) {
            if (!parent.is_string()) fail(origin, "CPT parents must be names");
            cpt.parents.push_back(ParentRef::parse(parent.get<std::string>()));
        }
        for (const auto& value : entry.at("table")) {
            if (!value.is_number()) fail(origin, "CPT table entries must be numbers");
            cpt.table.push_back(value.get<double>());
        }
        out.push_back(std::move(cpt));
    }
    return out;
}

} // namespace

std::string model_to_json(const NetworkSpec& spec) {
    std::string out;
    out.reserve(256 + spec.cpts.size() * 256);
    out += "{\n\"format_version\":\"1\",\n\"variables\":[";
    for (std::size_t i = 0; i < spec.variables.size(); ++i) {
        if (i) out += ',';
        out += "\n{\"name\":";
        append_escaped(out, spec.variables[i].name);
        out += ",\"cardinality\":";
        out += std::to_string(spec.variables[i].cardinality);
        out += ",\"role\":";
        append_escaped(out, std::string(role_name(spec.variables[i].role)));
        out += '}';
    }
    out += "],\n\"intra_edges\":";
    append_edges(out, spec.intra_edges);
    out += ",\n\"inter_edges\":";
    append_edges(out, spec.inter_edges);
    out += ",\n\"cpts\":";
    append_cpts(out, spec.cpts);
    out += ",\n\"transition_cpts\":";
    append_cpts(out, spec.transition_cpts);
    out += "\n}\n";
    return out;
}

NetworkSpec parse_model_json(const std::string& text, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        fail(origin, std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) fail(origin, "model document must be a JSON object");
    if (!doc.contains("format_version") || doc.at("format_version") != "1") {
        fail(origin, "missing or unsupported format_version (expected \"1\")");
    }

    NetworkSpec spec;
    if (!doc.contains("variables") || !doc.at("variables").is_array()) {
        fail(origin, "variables must be an array");
    }
    for (const auto& entry : doc.at("variables")) {
        if (!entry.is_object() || !entry.contains("name") || !entry.contains("cardinality") ||
            !entry.contains("role")) {
            fail(origin, "variable entries need name, cardinality, role");
        }
        Variable v;
        v.name = entry.at("name").get<std::string>();
        v.cardinality = entry.at("cardinality").get<int>();
        try {
            v.role = role_from_name(entry.at("role").get<std::string>());
        } catch (const std::invalid_argument& e) {
            fail(origin, e.what());
        }
        spec.variables.push_back(std::move(v));
    }
    spec.intra_edges = parse_edges(doc.value("intra_edges", json::array()), origin, "intra_edges");
    spec.inter_edges = parse_edges(doc.value("inter_edges", json::array()), origin, "inter_edges");
    spec.cpts = parse_cpts(doc.value("cpts", json::array()), origin, "cpts");
    spec.transition_cpts =
        parse_cpts(doc.value("transition_cpts", json::array()), origin, "transition_cpts");
    return spec;
}

NetworkSpec load_model(const std::filesystem::path& path) {
    return parse_model_json(read_file(path), path.string());
}

void save_model(const NetworkSpec& spec, const std::filesystem::path& path) {
    atomic_write_file(path, model_to_json(spec));
}

} // namespace aufuse
