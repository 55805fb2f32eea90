#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vpgkit/error.hpp"

namespace vpgkit {

/// Interned letter: an index into the declaring alphabet. Ordering follows
/// declaration order, which is also the lexicographic order used everywhere.
enum class Letter : std::uint32_t {};

constexpr std::uint32_t index(Letter l) noexcept { return static_cast<std::uint32_t>(l); }
constexpr Letter letter_at(std::size_t i) noexcept { return static_cast<Letter>(i); }

using Word = std::vector<Letter>;

enum class LetterKind : std::uint8_t { call, internal, ret };

constexpr std::string_view to_string(LetterKind k) {
  switch (k) {
    case LetterKind::call: return "call";
    case LetterKind::internal: return "internal";
    case LetterKind::ret: return "return";
  }
  return "?";
}

/// Length-then-lexicographic comparison, the canonical word order.
inline bool shortlex_less(const Word& a, const Word& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

inline Word concat(const Word& a, const Word& b) {
  Word out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

inline Word power(const Word& w, std::size_t n) {
  Word out;
  out.reserve(w.size() * n);
  for (std::size_t i = 0; i < n; ++i) out.insert(out.end(), w.begin(), w.end());
  return out;
}

class PartitionedAlphabet {
 public:
  PartitionedAlphabet() = default;

  /// Letters in the given order. Throws PartitionOverlap on a repeated name
  /// and EmptyAlphabet on an empty list.
  static PartitionedAlphabet from_letters(std::vector<std::pair<std::string, LetterKind>> letters) {
    if (letters.empty()) throw Error(ErrorCode::EmptyAlphabet, "alphabet has no letters");
    PartitionedAlphabet out;
    for (auto& [name, kind] : letters) {
      if (name.empty()) throw Error(ErrorCode::SchemaViolation, "empty letter name");
      if (out.by_name_.count(name))
        throw Error(ErrorCode::PartitionOverlap, "letter '" + name + "' appears in more than one part");
      out.by_name_.emplace(name, letter_at(out.names_.size()));
      out.names_.push_back(std::move(name));
      out.kinds_.push_back(kind);
    }
    return out;
  }

  std::size_t size() const noexcept { return names_.size(); }

  const std::string& name(Letter l) const {
    check(l);
    return names_[index(l)];
  }
  LetterKind kind(Letter l) const {
    check(l);
    return kinds_[index(l)];
  }
  bool is_call(Letter l) const { return kind(l) == LetterKind::call; }
  bool is_internal(Letter l) const { return kind(l) == LetterKind::internal; }
  bool is_return(Letter l) const { return kind(l) == LetterKind::ret; }

  bool contains(Letter l) const noexcept { return index(l) < names_.size(); }

  std::optional<Letter> find(std::string_view name) const {
    auto it = by_name_.find(std::string(name));
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
  }

  Letter letter(std::string_view name) const {
    if (auto l = find(name)) return *l;
    throw Error(ErrorCode::UnknownLetter, "'" + std::string(name) + "'");
  }

  std::vector<Letter> letters() const {
    std::vector<Letter> out;
    for (std::size_t i = 0; i < size(); ++i) out.push_back(letter_at(i));
    return out;
  }

  std::vector<Letter> letters_of(LetterKind k) const {
    std::vector<Letter> out;
    for (std::size_t i = 0; i < size(); ++i)
      if (kinds_[i] == k) out.push_back(letter_at(i));
    return out;
  }

  void check(Letter l) const {
    if (!contains(l)) throw Error(ErrorCode::UnknownLetter, "letter index " + std::to_string(index(l)));
  }

  void check(const Word& w) const {
    for (Letter l : w) check(l);
  }

  const std::vector<std::string>& names() const noexcept { return names_; }

  bool operator==(const PartitionedAlphabet& o) const { return names_ == o.names_ && kinds_ == o.kinds_; }

 private:
  std::vector<std::string> names_;
  std::vector<LetterKind> kinds_;
  std::map<std::string, Letter, std::less<>> by_name_;
};

/// Declaration order is calls, then internals, then returns.
inline PartitionedAlphabet make_partitioned_alphabet(const std::vector<std::string>& calls,
                                                     const std::vector<std::string>& internals,
                                                     const std::vector<std::string>& returns) {
  std::vector<std::pair<std::string, LetterKind>> letters;
  for (const auto& n : calls) letters.emplace_back(n, LetterKind::call);
  for (const auto& n : internals) letters.emplace_back(n, LetterKind::internal);
  for (const auto& n : returns) letters.emplace_back(n, LetterKind::ret);
  return PartitionedAlphabet::from_letters(std::move(letters));
}

/// Order of a group element; nullopt means infinite order.
using Order = std::optional<std::uint64_t>;

/// An inverse-closed alphabet Σ = X ∪ X⁻¹ over a partition, with torsion data.
/// Generating alphabets that are not inverse-closed are not supported.
class GroupAlphabet {
 public:
  GroupAlphabet() = default;

  /// `pairs` lists each (x, x⁻¹) once; the first member of a pair is the
  /// positive letter. Orders default to infinite.
  static GroupAlphabet make(PartitionedAlphabet base,
                            const std::vector<std::pair<std::string, std::string>>& pairs,
                            const std::map<std::string, Order>& orders = {}) {
    GroupAlphabet out;
    const std::size_t n = base.size();
    constexpr std::uint32_t unset = UINT32_MAX;
    std::vector<std::uint32_t> inv(n, unset);
    for (const auto& [x, y] : pairs) {
      Letter lx = base.letter(x);
      Letter ly = base.letter(y);
      if (lx == ly) throw Error(ErrorCode::InvalidInverse, "letter '" + x + "' is its own inverse");
      auto& ix = inv[index(lx)];
      auto& iy = inv[index(ly)];
      if ((ix != unset && ix != index(ly)) || (iy != unset && iy != index(lx)))
        throw Error(ErrorCode::InvalidInverse, "conflicting inverse for '" + x + "' / '" + y + "'");
      ix = index(ly);
      iy = index(lx);
    }
    for (std::size_t i = 0; i < n; ++i)
      if (inv[i] == unset)
        throw Error(ErrorCode::InvalidInverse, "letter '" + base.names()[i] + "' has no inverse");
    out.inverse_.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.inverse_[i] = letter_at(inv[i]);
    out.positive_.assign(n, false);
    for (const auto& [x, y] : pairs)
      if (!out.positive_[index(base.letter(y))]) out.positive_[index(base.letter(x))] = true;
    out.order_.assign(n, std::nullopt);
    for (const auto& [name, ord] : orders) {
      Letter l = base.letter(name);
      if (ord && *ord == 0) throw Error(ErrorCode::InvalidInverse, "order of '" + name + "' must be positive");
      auto partner = orders.find(base.name(out.inverse_[index(l)]));
      if (partner != orders.end() && partner->second != ord)
        throw Error(ErrorCode::InvalidInverse, "order('" + name + "') differs from its inverse's order");
      out.order_[index(l)] = ord;
      out.order_[inv[index(l)]] = ord;
    }
    out.base_ = std::move(base);
    return out;
  }

  /// Uppercase-inverse convention: for every letter whose uppercase spelling
  /// is also a letter, those two are paired.
  static GroupAlphabet with_case_inverses(PartitionedAlphabet base, const std::map<std::string, Order>& orders = {}) {
    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto& n : base.names()) {
      std::string up = n;
      for (auto& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      if (up != n && base.find(up)) pairs.emplace_back(n, up);
    }
    return make(std::move(base), pairs, orders);
  }

  /// Free group on `generators`, letters ordered x1, X1, x2, X2, ... and all
  /// internal unless kinds are supplied for the positive letters and their
  /// inverses.
  static GroupAlphabet free(const std::vector<std::string>& generators) {
    std::vector<std::pair<std::string, LetterKind>> letters;
    std::vector<std::pair<std::string, std::string>> pairs;
    for (const auto& g : generators) {
      std::string up = g;
      for (auto& c : up) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      letters.emplace_back(g, LetterKind::internal);
      letters.emplace_back(up, LetterKind::internal);
      pairs.emplace_back(g, up);
    }
    return make(PartitionedAlphabet::from_letters(std::move(letters)), pairs);
  }

  const PartitionedAlphabet& base() const noexcept { return base_; }
  std::size_t size() const noexcept { return base_.size(); }

  Letter inverse(Letter l) const {
    base_.check(l);
    return inverse_[index(l)];
  }
  Order order(Letter l) const {
    base_.check(l);
    return order_[index(l)];
  }
  bool is_positive(Letter l) const {
    base_.check(l);
    return positive_[index(l)];
  }

  std::vector<Letter> positive_letters() const {
    std::vector<Letter> out;
    for (std::size_t i = 0; i < size(); ++i)
      if (positive_[i]) out.push_back(letter_at(i));
    return out;
  }

  Word invert(const Word& w) const {
    Word out;
    out.reserve(w.size());
    for (auto it = w.rbegin(); it != w.rend(); ++it) out.push_back(inverse(*it));
    return out;
  }

  bool operator==(const GroupAlphabet& o) const {
    return base_ == o.base_ && inverse_ == o.inverse_ && order_ == o.order_;
  }

 private:
  PartitionedAlphabet base_;
  std::vector<Letter> inverse_;
  std::vector<bool> positive_;
  std::vector<Order> order_;
};

namespace detail {

inline bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

inline Word parse_word_impl(const PartitionedAlphabet& alpha, const GroupAlphabet* group, std::string_view text) {
  Word out;
  std::size_t pos = 0;
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::UnknownLetter, what + " at offset " + std::to_string(pos) + " in '" + std::string(text) + "'");
  };
  while (pos < text.size()) {
    if (is_space(text[pos])) {
      ++pos;
      continue;
    }
    if (text.compare(pos, 3, "eps") == 0 && !alpha.find("eps")) {
      pos += 3;
      continue;
    }
    if (text.compare(pos, 2, "\xCE\xB5") == 0) {  // ε
      pos += 2;
      continue;
    }
    // longest letter name that matches at pos
    std::size_t best = 0;
    std::optional<Letter> found;
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      const auto& n = alpha.names()[i];
      if (n.size() > best && text.compare(pos, n.size(), n) == 0) {
        best = n.size();
        found = letter_at(i);
      }
    }
    if (!found) fail("unknown letter");
    pos += best;
    if (text.compare(pos, 3, "^-1") == 0) {
      if (!group) fail("inverse suffix without group structure");
      out.push_back(group->inverse(*found));
      pos += 3;
    } else {
      out.push_back(*found);
    }
  }
  return out;
}

}  // namespace detail

/// Plain-text words: letter names, optionally separated by whitespace, matched
/// longest-first. `ε`, `eps` or the empty string denote the empty word.
inline Word parse_word(const PartitionedAlphabet& alpha, std::string_view text) {
  return detail::parse_word_impl(alpha, nullptr, text);
}

/// As above, additionally accepting a `^-1` suffix after any letter.
inline Word parse_word(const GroupAlphabet& alpha, std::string_view text) {
  return detail::parse_word_impl(alpha.base(), &alpha, text);
}

/// Compact spelling when all names are single characters, space-separated
/// otherwise; the empty word prints as ε.
inline std::string format_word(const PartitionedAlphabet& alpha, const Word& w) {
  if (w.empty()) return "\xCE\xB5";
  bool compact = std::all_of(alpha.names().begin(), alpha.names().end(), [](const auto& n) { return n.size() == 1; });
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!compact && i) out += ' ';
    out += alpha.name(w[i]);
  }
  return out;
}

inline std::string format_word(const GroupAlphabet& alpha, const Word& w) { return format_word(alpha.base(), w); }

struct MatchProfile {
  bool is_mr = true;
  bool is_mc = true;
  bool is_wm = true;
  std::size_t unmatched_calls = 0;
  std::size_t unmatched_returns = 0;

  bool operator==(const MatchProfile&) const = default;
};

/// Prefix/suffix counting per the matched-response and matched-call
/// definitions; the unmatched counts come from the usual nesting relation.
inline MatchProfile classify_word(const PartitionedAlphabet& alpha, const Word& w) {
  alpha.check(w);
  MatchProfile p;
  long long balance = 0;
  for (Letter l : w) {
    if (alpha.is_call(l)) ++balance;
    if (alpha.is_return(l)) --balance;
    if (balance < 0) p.is_mr = false;
  }
  balance = 0;
  for (auto it = w.rbegin(); it != w.rend(); ++it) {
    if (alpha.is_call(*it)) ++balance;
    if (alpha.is_return(*it)) --balance;
    if (balance > 0) p.is_mc = false;
  }
  std::size_t depth = 0;
  for (Letter l : w) {
    if (alpha.is_call(l)) {
      ++depth;
    } else if (alpha.is_return(l)) {
      if (depth == 0)
        ++p.unmatched_returns;
      else
        --depth;
    }
  }
  p.unmatched_calls = depth;
  p.is_wm = p.is_mr && p.is_mc;
  return p;
}

/// Single left-to-right pass keeping a stack of survivors.
inline Word free_reduce(const GroupAlphabet& alpha, const Word& w) {
  alpha.base().check(w);
  Word out;
  out.reserve(w.size());
  for (Letter l : w) {
    if (!out.empty() && out.back() == alpha.inverse(l))
      out.pop_back();
    else
      out.push_back(l);
  }
  return out;
}

/// Normal form in the free product of cyclic groups ⟨x | x^order(x)⟩.
/// Each syllable is p^e with p positive; finite orders keep 0 < e < order.
/// Equals free_reduce when every order is infinite.
inline Word torsion_reduce(const GroupAlphabet& alpha, const Word& w) {
  alpha.base().check(w);
  std::vector<std::pair<Letter, long long>> syllables;
  for (Letter l : w) {
    const bool pos = alpha.is_positive(l);
    const Letter p = pos ? l : alpha.inverse(l);
    if (syllables.empty() || syllables.back().first != p) syllables.emplace_back(p, 0);
    auto& e = syllables.back().second;
    e += pos ? 1 : -1;
    if (const Order n = alpha.order(p)) e = ((e % static_cast<long long>(*n)) + static_cast<long long>(*n)) % static_cast<long long>(*n);
    if (e == 0) syllables.pop_back();
  }
  Word out;
  for (const auto& [p, e] : syllables)
    for (long long i = 0; i < (e < 0 ? -e : e); ++i) out.push_back(e < 0 ? alpha.inverse(p) : p);
  return out;
}

inline bool is_reduced(const GroupAlphabet& alpha, const Word& w) {
  for (std::size_t i = 1; i < w.size(); ++i)
    if (w[i] == alpha.inverse(w[i - 1])) return false;
  return true;
}

/// Calls `visit(word)` for every word of length ≤ max_len over `letters`
/// letters in shortlex order. Returning false from `visit` stops the walk.
template <class Visitor>
void for_each_word(std::size_t letters, std::size_t max_len, Visitor&& visit) {
  Word w;
  for (std::size_t len = 0; len <= max_len; ++len) {
    if (letters == 0 && len > 0) return;
    w.assign(len, letter_at(0));
    while (true) {
      if (!visit(static_cast<const Word&>(w))) return;
      std::size_t i = len;
      while (i > 0 && index(w[i - 1]) + 1 == letters) w[--i] = letter_at(0);
      if (i == 0) break;
      w[i - 1] = letter_at(index(w[i - 1]) + 1);
    }
  }
}

inline std::vector<Word> words_up_to(std::size_t letters, std::size_t max_len) {
  std::vector<Word> out;
  for_each_word(letters, max_len, [&](const Word& w) {
    out.push_back(w);
    return true;
  });
  return out;
}

/// Reduced words of length ≤ max_len in shortlex order.
inline std::vector<Word> reduced_words_up_to(const GroupAlphabet& alpha, std::size_t max_len) {
  std::vector<Word> out{Word{}};
  std::size_t level_begin = 0;
  for (std::size_t len = 1; len <= max_len; ++len) {
    std::size_t level_end = out.size();
    for (std::size_t i = level_begin; i < level_end; ++i) {
      for (std::size_t l = 0; l < alpha.size(); ++l) {
        Letter x = letter_at(l);
        if (!out[i].empty() && out[i].back() == alpha.inverse(x)) continue;
        Word next = out[i];
        next.push_back(x);
        out.push_back(std::move(next));
      }
    }
    level_begin = level_end;
  }
  return out;
}

}  // namespace vpgkit
