#include "ducs/kvfile.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "ducs/errors.hpp"

namespace ducs::kvfile {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

} // namespace

std::map<std::string, std::string> parse(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw DataError("config line " + std::to_string(line_no) +
                            " is not key=value: '" + stripped + "'");
        }
        kv[trim(stripped.substr(0, eq))] = trim(stripped.substr(eq + 1));
    }
    return kv;
}

std::map<std::string, std::string> read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str());
}

void write_file(const std::string& path, const Entries& entries) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write config file: " + path);
    for (const auto& [key, value] : entries) out << key << "=" << value << "\n";
    if (!out) throw DataError("write failed: " + path);
}

const std::string& require(const std::map<std::string, std::string>& kv,
                           const std::string& key) {
    const auto it = kv.find(key);
    if (it == kv.end()) throw DataError("missing config key: " + key);
    return it->second;
}

std::int64_t get_int(const std::map<std::string, std::string>& kv,
                     const std::string& key) {
    const std::string& text = require(kv, key);
    std::int64_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw DataError("config key '" + key + "' is not an integer: '" + text + "'");
    }
    return value;
}

std::uint64_t get_u64(const std::map<std::string, std::string>& kv,
                      const std::string& key) {
    const std::string& text = require(kv, key);
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw DataError("config key '" + key + "' is not a non-negative integer: '" +
                        text + "'");
    }
    return value;
}

double get_double(const std::map<std::string, std::string>& kv,
                  const std::string& key) {
    const std::string& text = require(kv, key);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw DataError("config key '" + key + "' is not a number: '" + text + "'");
    }
    return value;
}

std::string format_double(double value) {
    char buffer[64];
    const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, ptr);
}

} // namespace ducs::kvfile
