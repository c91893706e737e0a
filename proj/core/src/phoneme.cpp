#include "g2pstack/phoneme.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "g2pstack/error.hpp"
#include "g2pstack/text.hpp"

namespace g2p {

namespace {

void check_symbol_token(const std::string& symbol, const std::string& where) {
  if (symbol.empty()) throw ParseError(where + ": empty phoneme symbol");
  for (char c : symbol) {
    if (c == ' ' || c == '\t' || c == ',' || c == '#') {
      throw ParseError(where + ": phoneme symbol '" + symbol + "' contains a reserved character");
    }
  }
  if (symbol == "=") {
    throw ParseError(where + ": symbol '=' is reserved for window padding");
  }
}

}  // namespace

PhonemeInventory::PhonemeInventory(std::string scheme_name, std::vector<Phoneme> symbols)
    : scheme_name_(std::move(scheme_name)) {
  int null_count = 0;
  for (auto& p : symbols) {
    check_symbol_token(p.symbol, scheme_name_);
    if (p.is_null) {
      if (p.symbol != "-") throw ParseError(scheme_name_ + ": null phoneme must be '-'");
      if (!p.parts.empty()) throw ParseError(scheme_name_ + ": null phoneme cannot be compound");
      ++null_count;
    }
    if (p.is_compound && p.parts.size() < 2) {
      throw ParseError(scheme_name_ + ": compound '" + p.symbol + "' needs at least 2 parts");
    }
    if (!symbols_.emplace(p.symbol, p).second) {
      throw ParseError(scheme_name_ + ": duplicate phoneme symbol '" + p.symbol + "'");
    }
  }
  if (null_count != 1) {
    throw ParseError(scheme_name_ + ": inventory must declare exactly one null phoneme '-', found " +
                     std::to_string(null_count));
  }
  for (const auto& [sym, p] : symbols_) {
    if (!p.is_compound) continue;
    for (const auto& part : p.parts) {
      auto it = symbols_.find(part);
      if (it == symbols_.end()) {
        throw ParseError(scheme_name_ + ": compound '" + sym + "' uses unknown part '" + part + "'");
      }
      if (it->second.is_compound) {
        throw ParseError(scheme_name_ + ": compound '" + sym + "' uses compound part '" + part + "'");
      }
      if (it->second.is_null) {
        throw ParseError(scheme_name_ + ": compound '" + sym + "' uses the null phoneme as part");
      }
    }
    compounds_[sym] = p.parts;
  }
}

PhonemeInventory PhonemeInventory::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open inventory file: " + path);
  return parse(in, path);
}

PhonemeInventory PhonemeInventory::parse(std::istream& in, std::string scheme_name) {
  std::vector<Phoneme> symbols;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = trim(line);
    if (sv.empty() || sv[0] == '#') continue;
    auto fields = split(std::string(sv), '\t');
    Phoneme p;
    p.symbol = std::string(trim(fields[0]));
    if (p.symbol == "-") {
      p.is_null = true;
      if (fields.size() > 1 && !trim(fields[1]).empty()) {
        throw ParseError(scheme_name + ":" + std::to_string(lineno) +
                         ": null phoneme cannot declare parts");
      }
    } else if (fields.size() > 1 && !trim(fields[1]).empty()) {
      p.is_compound = true;
      p.parts = split_ws(fields[1]);
    }
    symbols.push_back(std::move(p));
  }
  return PhonemeInventory(std::move(scheme_name), std::move(symbols));
}

void PhonemeInventory::save(std::ostream& out) const {
  for (const auto& [sym, p] : symbols_) {
    out << sym;
    if (p.is_compound) out << '\t' << join(p.parts, " ");
    out << '\n';
  }
}

const Phoneme& PhonemeInventory::at(const std::string& symbol) const {
  auto it = symbols_.find(symbol);
  if (it == symbols_.end()) {
    throw DataError(scheme_name_ + ": unknown phoneme symbol '" + symbol + "'");
  }
  return it->second;
}

const std::string& PhonemeInventory::null_symbol() const {
  static const std::string kNull = "-";
  return kNull;
}

std::vector<std::string> PhonemeInventory::expand_compounds(
    const std::vector<std::string>& phonemes) const {
  std::vector<std::string> out;
  out.reserve(phonemes.size());
  for (const auto& sym : phonemes) {
    auto it = compounds_.find(sym);
    if (it == compounds_.end()) {
      out.push_back(sym);
    } else {
      out.insert(out.end(), it->second.begin(), it->second.end());
    }
  }
  return out;
}

std::vector<std::string> PhonemeInventory::strip_nulls(
    const std::vector<std::string>& phonemes) const {
  std::vector<std::string> out;
  out.reserve(phonemes.size());
  for (const auto& sym : phonemes) {
    if (sym != null_symbol()) out.push_back(sym);
  }
  return out;
}

}  // namespace g2p
