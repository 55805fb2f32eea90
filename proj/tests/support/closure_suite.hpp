#pragma once

// Six automata over one partition, and set-level brute force for every
// closure operation on membership tables indexed by shortlex rank.

#include <functional>
#include <string>
#include <vector>

#include "support/oracles.hpp"

namespace oracle {

/// calls {a, d}, internal {c}, return {b}; letters 0..3 in that order.
inline PartitionedAlphabet suite_alphabet() { return make_partitioned_alphabet({"a", "d"}, {"c"}, {"b"}); }

struct Named {
  std::string name;
  Vpa vpa;
};

inline std::vector<Named> closure_suite() {
  const auto A = suite_alphabet();
  std::vector<Named> s;
  s.push_back({"anbn", anbn(A)});
  s.push_back({"well-matched",
               make_vpa(A, {"e", "n"}, {"e"}, {"e"}, {"B", "X"},
                        {"e a n B", "e d n B", "n a n X", "n d n X", "e c e", "n c n", "n b n X", "n b e B"})});
  s.push_back({"even-c", make_vpa(A, {"e", "o"}, {"e"}, {"e"}, {"X"},
                                  {"e c o", "o c e", "e a e X", "e d e X", "o a o X", "o d o X", "e b e X",
                                   "e b e _", "o b o X", "o b o _"})});
  s.push_back({"matched-d", make_vpa(A, {"s", "t"}, {"s"}, {"t"}, {"N", "M"},
                                     {"s a s N", "s d s N", "s d s M", "s c s", "s b s N", "s b s _", "s b t M",
                                      "t a t N", "t d t N", "t c t", "t b t N", "t b t M", "t b t _"})});
  s.push_back({"finite", make_vpa(A, {"0", "1", "2", "3", "F"}, {"0"}, {"F"}, {"X", "Y"},
                                  {"0 c F", "0 a 1 X", "1 b F X", "0 d 2 Y", "2 c 3", "3 b F Y"})});
  s.push_back({"bottom-read", make_vpa(A, {"s", "t"}, {"s"}, {"t"}, {"X"},
                                       {"s a s X", "s d s X", "s c s", "s b s X", "s b t _", "t a t X", "t d t X",
                                        "t c t", "t b t X", "t b t _"})});
  return s;
}

/// Finite languages used as quotient divisors.
inline std::vector<std::vector<Word>> quotient_divisors() {
  const auto A = suite_alphabet();
  return {{parse_word(A, "eps"), parse_word(A, "b"), parse_word(A, "cb")},
          {parse_word(A, "a"), parse_word(A, "ac")}};
}

using Table = std::vector<char>;

/// Membership through the library simulation, sharing prefixes by DFS.
inline Table simulated_table(const Vpa& v, std::size_t max_len) {
  const std::size_t k = v.alphabet().size();
  Table t(count_words(k, max_len), 0);
  Simulation sim(v);
  Word w;
  std::function<void()> walk = [&] {
    t[rank(w, k)] = sim.accepting();
    if (sim.dead() || w.size() == max_len) return;
    for (std::size_t i = 0; i < k; ++i) {
      w.push_back(letter_at(i));
      sim.push(letter_at(i));
      walk();
      sim.pop();
      w.pop_back();
    }
  };
  walk();
  return t;
}

inline Word slice(const Word& w, std::size_t i, std::size_t j) {
  return Word(w.begin() + static_cast<std::ptrdiff_t>(i), w.begin() + static_cast<std::ptrdiff_t>(j));
}

inline Table table_from(std::size_t k, std::size_t max_len, const std::function<bool(const Word&)>& member) {
  Table t(count_words(k, max_len), 0);
  for_each_word(k, max_len, [&](const Word& w) {
    t[rank(w, k)] = member(w);
    return true;
  });
  return t;
}

inline Table brute_concat(const Table& x, const Table& y, std::size_t k, std::size_t n) {
  return table_from(k, n, [&](const Word& w) {
    for (std::size_t i = 0; i <= w.size(); ++i)
      if (x[rank(slice(w, 0, i), k)] && y[rank(slice(w, i, w.size()), k)]) return true;
    return false;
  });
}

inline Table brute_star(const Table& x, std::size_t k, std::size_t n) {
  return table_from(k, n, [&](const Word& w) {
    std::vector<char> reach(w.size() + 1, 0);
    reach[0] = 1;
    for (std::size_t j = 1; j <= w.size(); ++j)
      for (std::size_t i = 0; i < j && !reach[j]; ++i)
        if (reach[i] && x[rank(slice(w, i, j), k)]) reach[j] = 1;
    return static_cast<bool>(reach[w.size()]);
  });
}

/// Image under a letter map `f`, by enumerating preimages letter by letter.
inline Table brute_image(const Table& x, const std::vector<std::size_t>& f, std::size_t k, std::size_t n) {
  std::vector<std::vector<std::size_t>> pre(k);
  for (std::size_t i = 0; i < k; ++i) pre[f[i]].push_back(i);
  return table_from(k, n, [&](const Word& w) {
    Word u(w.size());
    std::function<bool(std::size_t)> go = [&](std::size_t i) {
      if (i == w.size()) return static_cast<bool>(x[rank(u, k)]);
      for (std::size_t p : pre[index(w[i])]) {
        u[i] = letter_at(p);
        if (go(i + 1)) return true;
      }
      return false;
    };
    return go(0);
  });
}

/// `x` must cover lengths up to n plus the longest divisor word.
inline Table brute_quotient(const Table& x, const std::vector<Word>& by, Side side, std::size_t k, std::size_t n) {
  return table_from(k, n, [&](const Word& w) {
    for (const auto& d : by)
      if (x[rank(side == Side::right ? concat(w, d) : concat(d, w), k)]) return true;
    return false;
  });
}

inline Table brute_complement(Table x) {
  for (auto& c : x) c = !c;
  return x;
}

inline Table zip(const Table& x, const Table& y, bool conj) {
  Table t(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) t[i] = conj ? (x[i] && y[i]) : (x[i] || y[i]);
  return t;
}

/// One line per disagreement, naming the operation and the least bad word.
inline std::vector<std::string> closure_mismatches(std::size_t n) {
  const auto A = suite_alphabet();
  const std::size_t k = A.size();
  const auto suite = closure_suite();
  std::size_t longest = 0;
  for (const auto& d : quotient_divisors())
    for (const auto& w : d) longest = std::max(longest, w.size());
  std::vector<Table> wide, base;
  for (const auto& s : suite) {
    wide.push_back(membership_table(s.vpa, n + longest));
    base.push_back(Table(wide.back().begin(), wide.back().begin() + static_cast<std::ptrdiff_t>(count_words(k, n))));
  }
  std::vector<std::string> bad;
  auto compare = [&](const std::string& what, const Vpa& got, const Table& want) {
    const Table have = simulated_table(got, n);
    if (have == want) return;
    const auto all = words_up_to(k, n);
    for (const auto& w : all)
      if (have[rank(w, k)] != want[rank(w, k)]) {
        bad.push_back(what + " differs on " + format_word(A, w));
        return;
      }
  };
  for (std::size_t i = 0; i < suite.size(); ++i) {
    const auto& [name, v] = suite[i];
    compare("complement " + name, complement(v), brute_complement(base[i]));
    compare("star " + name, star(v), brute_star(base[i], k, n));
    compare("merge d into a " + name, rename(v, Renaming::by_name(A, A, {{"d", "a"}})),
            brute_image(base[i], {0, 0, 2, 3}, k, n));
    compare("swap a and d " + name, rename(v, Renaming::by_name(A, A, {{"a", "d"}, {"d", "a"}})),
            brute_image(base[i], {1, 0, 2, 3}, k, n));
    for (const auto& d : quotient_divisors())
      for (Side side : {Side::left, Side::right})
        compare(std::string(to_string(side)) + " quotient " + name, quotient_finite(v, d, side),
                brute_quotient(wide[i], d, side, k, n));
    for (std::size_t j = 0; j < suite.size(); ++j) {
      const auto& other = suite[j];
      compare("union " + name + " " + other.name, union_of(v, other.vpa), zip(base[i], base[j], false));
      compare("intersection " + name + " " + other.name, intersection(v, other.vpa), zip(base[i], base[j], true));
      compare("concat " + name + " " + other.name, concat(v, other.vpa), brute_concat(base[i], base[j], k, n));
    }
  }
  return bad;
}

}  // namespace oracle
