#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace ducs::kvfile {

using Entries = std::vector<std::pair<std::string, std::string>>;

// Flat `key=value` text files (one pair per line, '#' comments allowed).
std::map<std::string, std::string> read_file(const std::string& path);
std::map<std::string, std::string> parse(const std::string& text);
void write_file(const std::string& path, const Entries& entries);

// Lookups with type checks; all throw DataError on absence or bad syntax.
const std::string& require(const std::map<std::string, std::string>& kv,
                           const std::string& key);
std::int64_t get_int(const std::map<std::string, std::string>& kv,
                     const std::string& key);
std::uint64_t get_u64(const std::map<std::string, std::string>& kv,
                      const std::string& key);
double get_double(const std::map<std::string, std::string>& kv,
                  const std::string& key);

// Shortest round-trip decimal form of a double.
std::string format_double(double value);

} // namespace ducs::kvfile
