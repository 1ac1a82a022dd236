#include "oshe/toml_lite.hpp"

#include <cctype>
#include <sstream>

#include "oshe/errors.hpp"

namespace oshe {

namespace {

std::string strip(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos)
        return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

// Removes a trailing comment that is not inside a string literal.
std::string strip_comment(const std::string& s) {
    bool in_str = false;
    char quote = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        char c = s[i];
        if (in_str) {
            if (c == quote)
                in_str = false;
        } else if (c == '"' || c == '\'') {
            in_str = true;
            quote = c;
        } else if (c == '#') {
            return s.substr(0, i);
        }
    }
    return s;
}

nlohmann::json parse_scalar(const std::string& raw, int line_no) {
    std::string v = strip(raw);
    if (v.empty())
        throw ConfigError("toml: empty value at line " + std::to_string(line_no));
    if (v.front() == '"' || v.front() == '\'') {
        if (v.size() < 2 || v.back() != v.front())
            throw ConfigError("toml: unterminated string at line " +
                              std::to_string(line_no));
        return v.substr(1, v.size() - 2);
    }
    if (v == "true")
        return true;
    if (v == "false")
        return false;
    try {
        std::size_t used = 0;
        if (v.find_first_of(".eE") == std::string::npos &&
            v.find("inf") == std::string::npos && v.find("nan") == std::string::npos) {
            long long i = std::stoll(v, &used);
            if (used == v.size())
                return i;
        }
        double d = std::stod(v, &used);
        if (used == v.size())
            return d;
    } catch (const std::exception&) {
    }
    throw ConfigError("toml: cannot parse value '" + v + "' at line " +
                      std::to_string(line_no));
}

nlohmann::json parse_value(const std::string& raw, int line_no) {
    std::string v = strip(raw);
    if (!v.empty() && v.front() == '[') {
        if (v.back() != ']')
            throw ConfigError("toml: unterminated array at line " +
                              std::to_string(line_no));
        nlohmann::json arr = nlohmann::json::array();
        std::string body = v.substr(1, v.size() - 2);
        std::string item;
        bool in_str = false;
        char quote = 0;
        for (char c : body) {
            if (in_str) {
                item += c;
                if (c == quote)
                    in_str = false;
            } else if (c == '"' || c == '\'') {
                item += c;
                in_str = true;
                quote = c;
            } else if (c == ',') {
                if (!strip(item).empty())
                    arr.push_back(parse_scalar(item, line_no));
                item.clear();
            } else {
                item += c;
            }
        }
        if (!strip(item).empty())
            arr.push_back(parse_scalar(item, line_no));
        return arr;
    }
    return parse_scalar(v, line_no);
}

} // namespace

nlohmann::json parse_toml_lite(const std::string& text) {
    nlohmann::json root = nlohmann::json::object();
    nlohmann::json* current = &root;

    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string s = strip(strip_comment(line));
        if (s.empty())
            continue;
        if (s.front() == '[') {
            if (s.back() != ']')
                throw ConfigError("toml: malformed section header at line " +
                                  std::to_string(line_no));
            std::string path = strip(s.substr(1, s.size() - 2));
            if (path.empty())
                throw ConfigError("toml: empty section name at line " +
                                  std::to_string(line_no));
            current = &root;
            std::size_t pos = 0;
            while (pos != std::string::npos) {
                std::size_t dot = path.find('.', pos);
                std::string part = path.substr(
                    pos, dot == std::string::npos ? std::string::npos : dot - pos);
                part = strip(part);
                if (part.empty())
                    throw ConfigError("toml: empty section component at line " +
                                      std::to_string(line_no));
                current = &(*current)[part];
                pos = dot == std::string::npos ? dot : dot + 1;
            }
            if (!current->is_object() && !current->is_null())
                throw ConfigError("toml: section clashes with a key at line " +
                                  std::to_string(line_no));
            continue;
        }
        std::size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("toml: expected key = value at line " +
                              std::to_string(line_no));
        std::string key = strip(s.substr(0, eq));
        if (key.empty())
            throw ConfigError("toml: empty key at line " + std::to_string(line_no));
        if (key.front() == '"' || key.front() == '\'')
            key = key.substr(1, key.size() - 2);
        (*current)[key] = parse_value(s.substr(eq + 1), line_no);
    }
    return root;
}

} // namespace oshe
