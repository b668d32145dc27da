#include "experiment_config.hpp"

#include "critlab/errors.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace critlab::cli {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

[[noreturn]] void fail(int line, int col, const std::string& msg) {
    throw ConfigError("config line " + std::to_string(line) + ", col " + std::to_string(col) +
                      ": " + msg);
}

}  // namespace

ExperimentConfig ExperimentConfig::parse_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        cfg.raw_lines.push_back(line);
        const auto hash = line.find('#');
        std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
        if (body.empty()) continue;
        if (body.front() == '[') {
            if (body.back() != ']') fail(lineno, int(line.find('[')) + 1, "unterminated section header");
            section = trim(body.substr(1, body.size() - 2));
            if (section.empty()) fail(lineno, 1, "empty section name");
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos) fail(lineno, 1, "expected key = value");
        const std::string key = trim(body.substr(0, eq));
        const std::string value = trim(body.substr(eq + 1));
        if (key.empty()) fail(lineno, 1, "empty key");
        if (section.empty()) fail(lineno, 1, "key outside any [section]");
        cfg.entries[section][key] = {value, lineno};
    }
    return cfg;
}

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_text(ss.str());
}

bool ExperimentConfig::has(const std::string& section, const std::string& key) const {
    const auto s = entries.find(section);
    return s != entries.end() && s->second.count(key) > 0;
}

std::string ExperimentConfig::get(const std::string& section, const std::string& key) const {
    const auto s = entries.find(section);
    if (s == entries.end() || !s->second.count(key))
        throw ConfigError("config: missing [" + section + "] " + key);
    return s->second.at(key).first;
}

std::string ExperimentConfig::get_or(const std::string& section, const std::string& key,
                                     const std::string& fallback) const {
    return has(section, key) ? get(section, key) : fallback;
}

double ExperimentConfig::get_real(const std::string& section, const std::string& key) const {
    const auto& [value, line] = entries.at(section).at(key);
    try {
        std::size_t pos = 0;
        const double v = std::stod(value, &pos);
        if (trim(value.substr(pos)).size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        fail(line, 1, "[" + section + "] " + key + ": not a real number: '" + value + "'");
    }
}

double ExperimentConfig::get_real_or(const std::string& section, const std::string& key,
                                     double fallback) const {
    return has(section, key) ? get_real(section, key) : fallback;
}

long ExperimentConfig::get_int(const std::string& section, const std::string& key) const {
    const auto& [value, line] = entries.at(section).at(key);
    try {
        std::size_t pos = 0;
        const long v = std::stol(value, &pos);
        if (trim(value.substr(pos)).size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        fail(line, 1, "[" + section + "] " + key + ": not an integer: '" + value + "'");
    }
}

long ExperimentConfig::get_int_or(const std::string& section, const std::string& key,
                                  long fallback) const {
    return has(section, key) ? get_int(section, key) : fallback;
}

std::vector<double> parse_real_list(const std::string& text, const std::string& context) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        tok = trim(tok);
        if (tok.empty()) continue;
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(tok, &pos));
            if (trim(tok.substr(pos)).size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw ConfigError(context + ": bad number '" + tok + "'");
        }
    }
    return out;
}

std::vector<double> ExperimentConfig::get_reals(const std::string& section,
                                                const std::string& key) const {
    return parse_real_list(get(section, key), "[" + section + "] " + key);
}

std::vector<int> ExperimentConfig::get_ints(const std::string& section,
                                            const std::string& key) const {
    std::vector<int> out;
    for (double v : get_reals(section, key)) out.push_back(int(v));
    return out;
}

void ExperimentConfig::set(const std::string& section, const std::string& key,
                           const std::string& value) {
    entries[section][key] = {value, 0};
    raw_lines.push_back("# override: [" + section + "] " + key + " = " + value);
}

}  // namespace critlab::cli
