#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace nctcp {

// Sectioned key-value configuration:
//
//   # comment
//   [section]
//   key = value
//   list = 1.0, 1.25, 1.5
//
// Unknown sections and keys are preserved; readers pull what they need.
class Config {
  public:
    static Config parse(std::istream& in) {
        Config cfg;
        std::string line, section;
        while (std::getline(in, line)) {
            std::string s = strip(line);
            if (s.empty() || s[0] == '#' || s[0] == ';') continue;
            if (s.front() == '[') {
                auto end = s.find(']');
                if (end == std::string::npos) throw std::runtime_error("config: unterminated section");
                section = strip(s.substr(1, end - 1));
                cfg.sections_[section];
                continue;
            }
            auto eq = s.find('=');
            if (eq == std::string::npos) throw std::runtime_error("config: expected key = value: " + s);
            cfg.sections_[section][strip(s.substr(0, eq))] = strip(s.substr(eq + 1));
        }
        return cfg;
    }

    static Config parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("config: cannot open " + path);
        return parse(in);
    }

    static Config parse_string(const std::string& text) {
        std::istringstream in(text);
        return parse(in);
    }

    bool has(const std::string& section, const std::string& key) const {
        auto s = sections_.find(section);
        return s != sections_.end() && s->second.count(key) > 0;
    }

    bool has_section(const std::string& section) const { return sections_.count(section) > 0; }

    std::string get(const std::string& section, const std::string& key) const {
        auto s = sections_.find(section);
        if (s == sections_.end() || !s->second.count(key))
            throw std::runtime_error("config: missing " + section + "." + key);
        return s->second.at(key);
    }

    std::string get_or(const std::string& section, const std::string& key,
                       const std::string& fallback) const {
        return has(section, key) ? get(section, key) : fallback;
    }

    double get_double(const std::string& section, const std::string& key) const {
        return std::stod(get(section, key));
    }

    double get_double_or(const std::string& section, const std::string& key, double fallback) const {
        return has(section, key) ? get_double(section, key) : fallback;
    }

    long long get_int(const std::string& section, const std::string& key) const {
        return std::stoll(get(section, key));
    }

    long long get_int_or(const std::string& section, const std::string& key, long long fallback) const {
        return has(section, key) ? get_int(section, key) : fallback;
    }

    bool get_bool_or(const std::string& section, const std::string& key, bool fallback) const {
        if (!has(section, key)) return fallback;
        std::string v = get(section, key);
        if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
        if (v == "false" || v == "0" || v == "no" || v == "off") return false;
        throw std::runtime_error("config: bad boolean " + section + "." + key + " = " + v);
    }

    std::vector<double> get_list(const std::string& section, const std::string& key) const {
        std::vector<double> out;
        std::istringstream in(get(section, key));
        std::string item;
        while (std::getline(in, item, ',')) out.push_back(std::stod(strip(item)));
        return out;
    }

    void set(const std::string& section, const std::string& key, const std::string& value) {
        sections_[section][key] = value;
    }

    // Canonical dump: sections and keys sorted, suitable for embedding in
    // reports so a run can be reproduced from its own output.
    std::string dump() const {
        std::string out;
        for (const auto& [name, kv] : sections_) {
            out += "[" + name + "]\n";
            for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
        }
        return out;
    }

  private:
    static std::string strip(const std::string& s) {
        std::size_t a = s.find_first_not_of(" \t\r\n");
        if (a == std::string::npos) return "";
        std::size_t b = s.find_last_not_of(" \t\r\n");
        return s.substr(a, b - a + 1);
    }

    std::map<std::string, std::map<std::string, std::string>> sections_;
};

}  // namespace nctcp
