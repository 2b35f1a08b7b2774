#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace seepline {

/// Shortest round-trip decimal form of a double (std::to_chars); parsing the
/// result recovers the exact bit pattern, so CSV round-trips are lossless.
std::string format_double(double x);

/// Strict double parse of a full token. Returns false on any trailing junk.
bool parse_double(std::string_view token, double& out);

bool parse_int64(std::string_view token, std::int64_t& out);

/// Accepts integer epoch-seconds or ISO-8601 (YYYY-MM-DD[T ]HH:MM:SS, optional Z).
bool parse_timestamp(std::string_view token, std::int64_t& out);

/// Throwing variants for call sites where a malformed token is a hard error.
double parse_double(std::string_view token);
std::int64_t parse_int64(std::string_view token);
std::int64_t parse_timestamp(std::string_view token);

std::vector<std::string> split(std::string_view line, char sep);

std::string trim(std::string_view s);

/// FNV-1a 64-bit digest, rendered as 16 hex digits.
std::uint64_t fnv1a64(std::string_view bytes);
std::string digest_hex(std::string_view bytes);
std::string digest_file(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

/// Write-temp-then-rename so readers never observe a partial file.
void atomic_write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace seepline
