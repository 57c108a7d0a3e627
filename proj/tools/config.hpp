#pragma once

#include "shapelab/field.hpp"

#include <json.hpp>

#include <map>
#include <string>
#include <vector>

namespace shapelab::cli {

// Sectioned key = value document. Every key has a schema entry; unknown sections or keys and
// values of the wrong type are validation errors. Missing keys take their defaults, except the
// required ones (no default).
class RunConfig {
public:
    static RunConfig parse_text(const std::string& text, const std::string& base_dir = ".");
    // Accepts the key = value format or a JSON manifest written by a previous run.
    static RunConfig load(const std::string& path);
    static RunConfig from_json(const nlohmann::json& j, const std::string& base_dir = ".");

    void set(const std::string& section, const std::string& key, const std::string& value);

    const std::string& str(const std::string& section, const std::string& key) const;
    double num(const std::string& section, const std::string& key) const;
    int integer(const std::string& section, const std::string& key) const;
    Vec vec(const std::string& section, const std::string& key) const;
    std::vector<double> list(const std::string& section, const std::string& key) const;

    // Fills defaults, checks required keys and resolves path values against base_dir.
    void resolve();
    nlohmann::json to_json() const;
    std::string to_text() const;

private:
    std::string base_dir_ = ".";
    std::map<std::string, std::map<std::string, std::string>> values_;
};

} // namespace shapelab::cli
