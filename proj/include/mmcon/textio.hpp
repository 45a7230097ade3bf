#pragma once

#include <string>
#include <vector>

namespace mmcon {

// Shortest decimal that round-trips a double exactly (%.17g).
std::string fmt_g17(double v);

std::string trim(const std::string& s);
std::vector<std::string> split(const std::string& s, char sep);

// Strict full-string parsers; throw InvalidConfig with `what` in the message.
double parse_double(const std::string& s, const std::string& what);
long long parse_int(const std::string& s, const std::string& what);
bool parse_bool(const std::string& s, const std::string& what);

// lowercase, '-' mapped to '_'; for enum value spellings.
std::string normalize_token(const std::string& s);

}  // namespace mmcon
