#pragma once

// Shared helpers for the versioned text model container. All maps are
// emitted in sorted key order so that serialization is byte-identical
// across runs.

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "g2pstack/error.hpp"
#include "g2pstack/text.hpp"

namespace g2p::detail {

inline constexpr const char* kModelMagic = "g2pstack-model";
inline constexpr const char* kModelVersion = "v1";

inline void write_model_header(std::ostream& out, const std::string& kind) {
  out << kModelMagic << ' ' << kModelVersion << ' ' << kind << '\n';
}

inline std::string read_model_header(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("model file is empty");
  auto tokens = split_ws(line);
  if (tokens.size() != 3 || tokens[0] != kModelMagic) {
    throw ParseError("not a g2pstack model file");
  }
  if (tokens[1] != kModelVersion) {
    throw ParseError("unsupported model version '" + tokens[1] + "'");
  }
  return tokens[2];
}

inline std::vector<std::string> read_tokens(std::istream& in, const char* what) {
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto tokens = split_ws(line);
    if (!tokens.empty()) return tokens;
  }
  throw ParseError(std::string("model file truncated, expected ") + what);
}

inline std::vector<std::string> expect_keyword(std::istream& in, const std::string& key) {
  auto tokens = read_tokens(in, key.c_str());
  if (tokens[0] != key) {
    throw ParseError("model file: expected '" + key + "', got '" + tokens[0] + "'");
  }
  return tokens;
}

inline long long parse_int(const std::string& s, const char* what) {
  try {
    std::size_t pos = 0;
    long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(std::string("model file: bad integer for ") + what + ": '" + s + "'");
  }
}

inline double parse_double(const std::string& s, const char* what) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(std::string("model file: bad number for ") + what + ": '" + s + "'");
  }
}

inline void check_token(const std::string& s, const char* what) {
  if (s.empty()) throw InternalError(std::string("cannot serialize empty ") + what);
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      throw InternalError(std::string("cannot serialize ") + what + " containing whitespace: '" +
                          s + "'");
    }
  }
}

}  // namespace g2p::detail
