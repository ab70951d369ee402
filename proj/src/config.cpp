#include "gorlicz/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>

namespace gorlicz {

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
    static const std::map<std::string, std::set<std::string>> keys = {
        {"phi", {"family", "p", "q", "weight", "exponent", "p_lower", "q_upper", "L", "samples", "t_min", "t_max",
                 "count", "expr", "strictly_convex"}},
        {"domain", {"shape", "h", "lo", "hi", "a", "b", "center", "radius", "k", "power"}},
        {"problem", {"boundary", "obstacle", "smoothing", "reference", "reference_tol"}},
        {"solver", {"method", "max_iters", "tol", "omega", "random_start", "seed", "contact_tol"}},
        {"diagnostics", {"checks", "centers", "radii", "x0", "tol", "fatness", "eps", "levels", "max_growth",
                         "r0", "sub_center", "sub_radius", "max_spread"}},
        {"conditions", {"checks", "p", "q", "t_min", "t_max", "t_count", "centers", "r_max", "levels", "mode"}},
        {"capacity", {"x0", "radii", "cells_per_radius", "center", "radius"}},
        {"output", {"dir"}},
    };
    return keys;
}

std::string trim(std::string_view s, std::size_t* offset = nullptr) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    if (offset) *offset = a;
    return std::string(s.substr(a, b - a));
}

// Splits on whitespace and commas, keeping each token's column.
std::vector<std::pair<std::string, int>> tokens(const std::string& text, int column, const std::string& separators) {
    std::vector<std::pair<std::string, int>> out;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && separators.find(text[i]) != std::string::npos) ++i;
        const std::size_t start = i;
        while (i < text.size() && separators.find(text[i]) == std::string::npos) ++i;
        if (i > start) out.emplace_back(text.substr(start, i - start), column + static_cast<int>(start));
    }
    return out;
}

}  // namespace

Config Config::parse(std::string_view text) {
    Config cfg;
    std::string section;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t end = std::min(text.find('\n', pos), text.size());
        std::string_view raw = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (const std::size_t hash = raw.find('#'); hash != std::string_view::npos) raw = raw.substr(0, hash);
        std::size_t lead = 0;
        const std::string line = trim(raw, &lead);
        if (line.empty()) {
            if (end == text.size()) break;
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']') throw ParseError("unterminated section header", line_no, static_cast<int>(lead) + 1);
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            if (!schema().count(section)) {
                throw ParseError("unknown section [" + section + "]", line_no, static_cast<int>(lead) + 1);
            }
            cfg.sections_[section];
        } else {
            const std::size_t eq = raw.find('=');
            if (eq == std::string_view::npos) throw ParseError("expected key = value", line_no, static_cast<int>(lead) + 1);
            if (section.empty()) throw ParseError("key outside of any section", line_no, static_cast<int>(lead) + 1);
            const std::string key = trim(raw.substr(0, eq));
            std::size_t value_lead = 0;
            const std::string value = trim(raw.substr(eq + 1), &value_lead);
            const int value_col = static_cast<int>(eq + 1 + value_lead) + 1;
            if (key.empty()) throw ParseError("empty key", line_no, static_cast<int>(lead) + 1);
            if (!schema().at(section).count(key)) {
                throw ParseError("unknown key '" + key + "' in [" + section + "]", line_no, static_cast<int>(lead) + 1);
            }
            if (value.empty()) throw ParseError("empty value for '" + key + "'", line_no, value_col);
            if (cfg.sections_[section].count(key)) {
                throw ParseError("duplicate key '" + key + "'", line_no, static_cast<int>(lead) + 1);
            }
            cfg.sections_[section][key] = Entry{value, line_no, value_col};
        }
        if (end == text.size()) break;
    }
    return cfg;
}

Config Config::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config file '" + path.string() + "'", 0, 0);
    std::ostringstream buf;
    buf << in.rdbuf();
    Config cfg = parse(buf.str());
    cfg.base_dir_ = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    return cfg;
}

bool Config::has(const std::string& section, const std::string& key) const {
    const auto it = sections_.find(section);
    return it != sections_.end() && it->second.count(key) != 0;
}

const Config::Entry& Config::entry(const std::string& section, const std::string& key) const {
    if (!has(section, key)) throw ParseError("missing required key '" + key + "' in [" + section + "]", 0, 0);
    return sections_.at(section).at(key);
}

std::string Config::get_string(const std::string& section, const std::string& key) const {
    return entry(section, key).value;
}

std::string Config::get_string(const std::string& section, const std::string& key, const std::string& fallback) const {
    return has(section, key) ? get_string(section, key) : fallback;
}

double Config::get_number(const std::string& section, const std::string& key) const {
    const Entry& e = entry(section, key);
    const Expression expr = Expression::parse(e.value, e.line, e.column);
    if (expr.uses_variable('x') || expr.uses_variable('y') || expr.uses_variable('t')) {
        throw ParseError("'" + key + "' must be a constant", e.line, e.column);
    }
    return expr(0.0, 0.0, 0.0);
}

double Config::get_number(const std::string& section, const std::string& key, double fallback) const {
    return has(section, key) ? get_number(section, key) : fallback;
}

bool Config::get_bool(const std::string& section, const std::string& key, bool fallback) const {
    if (!has(section, key)) return fallback;
    const Entry& e = entry(section, key);
    if (e.value == "true" || e.value == "yes" || e.value == "1") return true;
    if (e.value == "false" || e.value == "no" || e.value == "0") return false;
    throw ParseError("expected true or false for '" + key + "'", e.line, e.column);
}

Expression Config::get_expression(const std::string& section, const std::string& key) const {
    const Entry& e = entry(section, key);
    return Expression::parse(e.value, e.line, e.column);
}

std::vector<double> Config::get_numbers(const std::string& section, const std::string& key) const {
    const Entry& e = entry(section, key);
    std::vector<double> out;
    for (const auto& [tok, col] : tokens(e.value, e.column, " \t,")) {
        const Expression expr = Expression::parse(tok, e.line, col);
        out.push_back(expr(0.0, 0.0, 0.0));
    }
    return out;
}

std::vector<Point> Config::get_points(const std::string& section, const std::string& key) const {
    const Entry& e = entry(section, key);
    std::vector<Point> out;
    for (const auto& [group, gcol] : tokens(e.value, e.column, ";")) {
        const auto coords = tokens(group, gcol, " \t,");
        if (coords.empty() || coords.size() > 2) throw ParseError("a point needs one or two coordinates", e.line, gcol);
        Point p{0.0, 0.0};
        for (std::size_t k = 0; k < coords.size(); ++k) {
            p[k] = Expression::parse(coords[k].first, e.line, coords[k].second)(0.0, 0.0, 0.0);
        }
        out.push_back(p);
    }
    return out;
}

std::vector<std::string> Config::get_words(const std::string& section, const std::string& key) const {
    std::vector<std::string> out;
    for (auto& [tok, col] : tokens(entry(section, key).value, 0, " \t,")) out.push_back(tok);
    return out;
}

}  // namespace gorlicz
