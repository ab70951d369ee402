#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gorlicz/common.hpp"
#include "gorlicz/expr.hpp"

namespace gorlicz {

/// Flat sectioned key = value text:
///
///     # comment
///     [section]
///     key = value
///
/// Unknown sections and keys are rejected so typos surface as parse errors.
class Config {
public:
    struct Entry {
        std::string value;
        int line = 0;
        int column = 0;  // column of the first value character
    };

    static Config parse(std::string_view text);
    static Config load(const std::filesystem::path& path);

    bool has(const std::string& section, const std::string& key) const;
    bool has_section(const std::string& section) const { return sections_.count(section) != 0; }
    const Entry& entry(const std::string& section, const std::string& key) const;

    std::string get_string(const std::string& section, const std::string& key) const;
    std::string get_string(const std::string& section, const std::string& key, const std::string& fallback) const;
    /// Numbers may be constant expressions such as 1/64.
    double get_number(const std::string& section, const std::string& key) const;
    double get_number(const std::string& section, const std::string& key, double fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
    Expression get_expression(const std::string& section, const std::string& key) const;
    /// Whitespace- or comma-separated constant expressions.
    std::vector<double> get_numbers(const std::string& section, const std::string& key) const;
    /// Points separated by ';', coordinates by whitespace.
    std::vector<Point> get_points(const std::string& section, const std::string& key) const;
    /// Whitespace- or comma-separated words.
    std::vector<std::string> get_words(const std::string& section, const std::string& key) const;

    /// Directory the config was loaded from; relative paths resolve against it.
    const std::filesystem::path& base_dir() const { return base_dir_; }

private:
    std::map<std::string, std::map<std::string, Entry>> sections_;
    std::filesystem::path base_dir_ = ".";
};

}  // namespace gorlicz
