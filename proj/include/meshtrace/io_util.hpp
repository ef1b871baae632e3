#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace meshtrace::io {

// Reads a whole file; throws std::runtime_error naming the path on failure.
std::string read_file(const std::string& path);

// Writes to "<path>.tmp" in the same directory, then renames over the target
// so readers never observe a partially written file.
void write_file_atomic(const std::string& path, const std::string& content);

// RFC 4180 quoting: fields containing commas, quotes or newlines are quoted.
std::string csv_escape(const std::string& field);
std::string csv_row(const std::vector<std::string>& fields);

// Minimal CSV reader for our own outputs. Skips blank lines and lines
// starting with '#'.
std::vector<std::vector<std::string>> parse_csv(const std::string& text);

std::string format_double(double x, int decimals = 6);

std::string to_lower(const std::string& s);

// FNV-1a, used to fingerprint configurations in output artifacts.
std::uint64_t fnv1a(const std::string& s);
std::string hex64(std::uint64_t v);

}  // namespace meshtrace::io
