#pragma once

#include <map>
#include <sstream>
#include <string>

#include "htq/common.hpp"

namespace htq {

// Flat sectioned key-value config:
//   [section]
//   key = value   # comment
class IniConfig {
public:
    static IniConfig parse(const std::string& text, const std::string& origin = "<string>") {
        IniConfig cfg;
        std::istringstream in(text);
        std::string line, section;
        size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            std::string s = strip(line);
            if (s.empty() || s[0] == '#' || s[0] == ';') continue;
            if (s.front() == '[') {
                require(s.back() == ']', ErrKind::ParseError,
                        origin + ":" + std::to_string(line_no) + ": unterminated section");
                section = strip(s.substr(1, s.size() - 2));
                continue;
            }
            auto eq = s.find('=');
            require(eq != std::string::npos, ErrKind::ParseError,
                    origin + ":" + std::to_string(line_no) + ": expected key = value");
            std::string key = strip(s.substr(0, eq));
            std::string value = strip(s.substr(eq + 1));
            auto hash = value.find('#');
            if (hash != std::string::npos) value = strip(value.substr(0, hash));
            require(!key.empty(), ErrKind::ParseError,
                    origin + ":" + std::to_string(line_no) + ": empty key");
            cfg.values_[section + "." + key] = value;
        }
        return cfg;
    }

    bool has(const std::string& section, const std::string& key) const {
        return values_.count(section + "." + key) > 0;
    }

    std::string get_str(const std::string& section, const std::string& key,
                        const std::string& fallback) const {
        auto it = values_.find(section + "." + key);
        return it == values_.end() ? fallback : it->second;
    }

    double get_num(const std::string& section, const std::string& key, double fallback) const {
        auto it = values_.find(section + "." + key);
        if (it == values_.end()) return fallback;
        try {
            size_t used = 0;
            double v = std::stod(it->second, &used);
            require(used == it->second.size(), ErrKind::ParseError, "junk");
            return v;
        } catch (const std::exception&) {
            raise(ErrKind::ParseError, section + "." + key + ": not a number: " + it->second);
        }
    }

    long get_int(const std::string& section, const std::string& key, long fallback) const {
        double v = get_num(section, key, static_cast<double>(fallback));
        long i = static_cast<long>(v);
        require(static_cast<double>(i) == v, ErrKind::ParseError,
                section + "." + key + ": expected an integer");
        return i;
    }

    bool get_bool(const std::string& section, const std::string& key, bool fallback) const {
        auto it = values_.find(section + "." + key);
        if (it == values_.end()) return fallback;
        if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
        if (it->second == "false" || it->second == "0" || it->second == "no") return false;
        raise(ErrKind::ParseError, section + "." + key + ": expected a boolean");
    }

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    static std::string strip(const std::string& s) {
        size_t a = s.find_first_not_of(" \t\r");
        if (a == std::string::npos) return "";
        size_t b = s.find_last_not_of(" \t\r");
        return s.substr(a, b - a + 1);
    }

    std::map<std::string, std::string> values_;
};

}  // namespace htq
