#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace epimine {

using SymbolId = std::int32_t;

// Dense token <-> id interning. Ids are assigned in first-seen order.
class Alphabet {
 public:
  SymbolId intern(const std::string& token) {
    if (token.empty()) throw std::invalid_argument("alphabet: empty token");
    auto it = ids_.find(token);
    if (it != ids_.end()) return it->second;
    SymbolId id = static_cast<SymbolId>(tokens_.size());
    tokens_.push_back(token);
    ids_.emplace(token, id);
    return id;
  }

  bool contains(const std::string& token) const { return ids_.count(token) != 0; }

  SymbolId id_of(const std::string& token) const {
    auto it = ids_.find(token);
    if (it == ids_.end()) throw std::out_of_range("alphabet: unknown token '" + token + "'");
    return it->second;
  }

  const std::string& token(SymbolId id) const { return tokens_.at(static_cast<size_t>(id)); }
  int size() const { return static_cast<int>(tokens_.size()); }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, SymbolId> ids_;
};

// Sequence of symbol ids. Indexing is 1-based: s[1..L].
class SymbolSequence {
 public:
  SymbolSequence() = default;
  explicit SymbolSequence(std::vector<SymbolId> items) : items_(std::move(items)) {}

  int length() const { return static_cast<int>(items_.size()); }
  bool empty() const { return items_.empty(); }

  SymbolId at1(int i) const {
    if (i < 1 || i > length()) throw std::out_of_range("sequence index out of range");
    return items_[static_cast<size_t>(i - 1)];
  }

  void push_back(SymbolId id) { items_.push_back(id); }
  const std::vector<SymbolId>& items() const { return items_; }

  // Sub-window s[i, j], inclusive. j = i - 1 yields the empty sequence.
  SymbolSequence window(int i, int j) const {
    if (i < 1 || j > length() || j < i - 1) throw std::out_of_range("bad sub-window");
    return SymbolSequence(std::vector<SymbolId>(items_.begin() + (i - 1), items_.begin() + j));
  }

 private:
  std::vector<SymbolId> items_;
};

inline SymbolSequence read_sequence(std::istream& in, Alphabet& alphabet) {
  std::vector<SymbolId> items;
  std::string token;
  while (in >> token) items.push_back(alphabet.intern(token));
  return SymbolSequence(std::move(items));
}

inline SymbolSequence sequence_from_tokens(const std::string& text, Alphabet& alphabet) {
  std::istringstream in(text);
  return read_sequence(in, alphabet);
}

// Test helper: one symbol per character, e.g. "accbabacb".
inline SymbolSequence sequence_from_chars(const std::string& chars, Alphabet& alphabet) {
  std::vector<SymbolId> items;
  items.reserve(chars.size());
  for (char c : chars) items.push_back(alphabet.intern(std::string(1, c)));
  return SymbolSequence(std::move(items));
}

inline void write_sequence(std::ostream& out, const SymbolSequence& s, const Alphabet& alphabet) {
  for (int i = 1; i <= s.length(); ++i) {
    out << alphabet.token(s.at1(i));
    out << (i % 20 == 0 ? '\n' : ' ');
  }
  if (s.length() % 20 != 0) out << '\n';
}

}  // namespace epimine
