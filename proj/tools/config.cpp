#include "config.hpp"

#include "shapelab/errors.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

namespace shapelab::cli {

namespace {

enum class Kind { Int, Num, Str, Vec, List, Path, Preset };

struct Key {
    Kind kind;
    std::optional<std::string> def; // nullopt marks a required key
};

using Schema = std::map<std::string, std::map<std::string, Key>>;

const Schema& schema() {
    static const Schema s = {
        {"grid", {{"dim", {Kind::Int, "2"}}, {"n", {Kind::Int, std::nullopt}}, {"box", {Kind::Num, "2.25"}}}},
        {"domain",
         {{"shape", {Kind::Str, "ball"}},
          {"radius", {Kind::Num, "1"}},
          {"center", {Kind::Vec, "0,0,0"}},
          {"normal", {Kind::Vec, "0,1,0"}},
          {"offset", {Kind::Num, "0"}},
          {"path", {Kind::Path, ""}}}},
        {"data",
         {{"f", {Kind::Preset, "constant:1"}}, {"g", {Kind::Preset, "constant:1"}}, {"Q", {Kind::Preset, "constant:0.25"}}}},
        {"optimize",
         {{"mode", {Kind::Str, "general"}},
          {"lambda", {Kind::Num, "1"}},
          {"Lambda", {Kind::Num, "1"}},
          {"heat_boundary", {Kind::Preset, "constant:1"}},
          {"design_radius", {Kind::Num, "2"}},
          {"init", {Kind::Str, "domain"}},
          {"step", {Kind::Num, "0.25"}},
          {"max_steps", {Kind::Int, "400"}},
          {"reinit_every", {Kind::Int, "10"}},
          {"stop_tol", {Kind::Num, "0.001"}},
          {"tol", {Kind::Num, "1e-10"}},
          {"max_halvings", {Kind::Int, "8"}},
          {"coarse_levels", {Kind::Int, "0"}}}},
        {"variation",
         {{"field", {Kind::Str, "bump-e1"}},
          {"center", {Kind::Str, "boundary"}},
          {"rho", {Kind::Num, "0.3"}},
          {"amplitude", {Kind::Num, "1"}},
          {"ladder", {Kind::List, "0.04,0.02,0.01"}},
          {"tol", {Kind::Num, "1e-10"}}}},
        {"blowup",
         {{"points", {Kind::Int, "8"}},
          {"radii", {Kind::Str, "dyadic"}},
          {"r_max", {Kind::Num, "0.25"}},
          {"tau", {Kind::Num, "0.1"}}}},
        {"cone",
         {{"dim", {Kind::Int, "3"}},
          {"theta_min", {Kind::Num, "0.2"}},
          {"theta_max", {Kind::Num, "2.9"}},
          {"theta_samples", {Kind::Int, "28"}},
          {"r_in", {Kind::Num, "1"}},
          {"r_out", {Kind::Num, "2"}},
          {"modes", {Kind::Int, "8"}},
          {"s_samples", {Kind::Int, "9"}}}},
        {"diagnose",
         {{"r_max", {Kind::Num, "0"}},
          {"max_points", {Kind::Int, "32"}},
          {"probes", {Kind::Int, "10"}},
          {"probe_radius_min", {Kind::Num, "0.1"}},
          {"probe_radius_max", {Kind::Num, "0.4"}}}},
        {"run", {{"seed", {Kind::Int, "1"}}}},
        {"output", {{"directory", {Kind::Path, "out"}}}},
    };
    return s;
}

[[noreturn]] void invalid(const std::string& msg) { throw Error(ErrorCode::Validation, msg); }

std::string trim(const std::string& s) {
    auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::optional<double> to_double(const std::string& s) {
    if (s.empty()) return std::nullopt;
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) return std::nullopt;
    return v;
}

std::vector<double> to_list(const std::string& s, const std::string& where) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto v = to_double(trim(item));
        if (!v) invalid(where + ": '" + s + "' is not a comma-separated number list");
        out.push_back(*v);
    }
    return out;
}

const Key& lookup(const std::string& section, const std::string& key) {
    auto s = schema().find(section);
    if (s == schema().end()) invalid("unknown section [" + section + "]");
    auto k = s->second.find(key);
    if (k == s->second.end()) invalid("unknown key '" + key + "' in [" + section + "]");
    return k->second;
}

void check_value(const std::string& section, const std::string& key, const std::string& value) {
    const Key& k = lookup(section, key);
    std::string where = "[" + section + "] " + key;
    switch (k.kind) {
    case Kind::Int: {
        auto v = to_double(value);
        if (!v || *v != double(long(*v))) invalid(where + ": '" + value + "' is not an integer");
        break;
    }
    case Kind::Num:
        if (!to_double(value)) invalid(where + ": '" + value + "' is not a number");
        break;
    case Kind::Vec: {
        auto l = to_list(value, where);
        if (l.size() < 2 || l.size() > 3) invalid(where + ": expected 2 or 3 components");
        break;
    }
    case Kind::List:
        if (to_list(value, where).empty()) invalid(where + ": empty list");
        break;
    case Kind::Preset:
        if (value.find(':') == std::string::npos) invalid(where + ": expected preset:parameters");
        break;
    case Kind::Str:
    case Kind::Path: break;
    }
}

std::string resolve_path(const std::string& base, const std::string& p) {
    if (p.empty()) return p;
    std::filesystem::path path(p);
    if (path.is_relative()) path = std::filesystem::path(base) / path;
    return std::filesystem::absolute(path).lexically_normal().string();
}

} // namespace

void RunConfig::set(const std::string& section, const std::string& key, const std::string& value) {
    check_value(section, key, value);
    values_[section][key] = value;
}

RunConfig RunConfig::parse_text(const std::string& text, const std::string& base_dir) {
    RunConfig c;
    c.base_dir_ = base_dir;
    std::stringstream ss(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') invalid("line " + std::to_string(lineno) + ": malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (!schema().count(section)) invalid("unknown section [" + section + "]");
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) invalid("line " + std::to_string(lineno) + ": expected key = value");
        if (section.empty()) invalid("line " + std::to_string(lineno) + ": key outside a section");
        std::string key = trim(line.substr(0, eq));
        if (c.values_[section].count(key)) invalid("duplicate key '" + key + "' in [" + section + "]");
        c.set(section, key, trim(line.substr(eq + 1)));
    }
    return c;
}

RunConfig RunConfig::from_json(const nlohmann::json& j, const std::string& base_dir) {
    const nlohmann::json& cfg = j.contains("config") ? j.at("config") : j;
    if (!cfg.is_object()) invalid("manifest config must be an object");
    RunConfig c;
    c.base_dir_ = base_dir;
    for (auto& [section, keys] : cfg.items()) {
        if (!keys.is_object()) invalid("section " + section + " must be an object");
        for (auto& [key, value] : keys.items()) {
            if (!value.is_string()) invalid("[" + section + "] " + key + " must be a string");
            c.set(section, key, value.get<std::string>());
        }
    }
    return c;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream is(path);
    if (!is) invalid("cannot read config " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    std::string text = ss.str();
    std::string base = std::filesystem::path(path).parent_path().string();
    if (base.empty()) base = ".";
    auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            invalid(std::string("malformed JSON config: ") + e.what());
        }
        return from_json(j, base);
    }
    return parse_text(text, base);
}

void RunConfig::resolve() {
    for (const auto& [section, keys] : schema())
        for (const auto& [key, k] : keys) {
            auto& sec = values_[section];
            if (!sec.count(key)) {
                if (!k.def) invalid("missing required key [" + section + "] " + key);
                sec[key] = *k.def;
            }
            std::string& v = sec[key];
            if (k.kind == Kind::Path) v = resolve_path(base_dir_, v);
            if (k.kind == Kind::Preset && v.rfind("fld:", 0) == 0) v = "fld:" + resolve_path(base_dir_, v.substr(4));
        }
    base_dir_ = "/";
}

const std::string& RunConfig::str(const std::string& section, const std::string& key) const {
    lookup(section, key);
    auto s = values_.find(section);
    if (s == values_.end() || !s->second.count(key)) invalid("config not resolved: [" + section + "] " + key);
    return s->second.at(key);
}

double RunConfig::num(const std::string& section, const std::string& key) const {
    return *to_double(str(section, key));
}

int RunConfig::integer(const std::string& section, const std::string& key) const {
    return int(*to_double(str(section, key)));
}

Vec RunConfig::vec(const std::string& section, const std::string& key) const {
    auto l = to_list(str(section, key), "[" + section + "] " + key);
    Vec v{0, 0, 0};
    for (std::size_t i = 0; i < l.size() && i < 3; ++i) v[i] = l[i];
    return v;
}

std::vector<double> RunConfig::list(const std::string& section, const std::string& key) const {
    return to_list(str(section, key), "[" + section + "] " + key);
}

nlohmann::json RunConfig::to_json() const {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [section, keys] : values_)
        for (const auto& [key, value] : keys) j[section][key] = value;
    return j;
}

std::string RunConfig::to_text() const {
    std::ostringstream os;
    for (const auto& [section, keys] : values_) {
        os << '[' << section << "]\n";
        for (const auto& [key, value] : keys) os << key << " = " << value << '\n';
    }
    return os.str();
}

} // namespace shapelab::cli
