#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

#include "liegrp.hpp"

namespace orthoklein {

// {v : v* [[A, B], [conj B, D]] v = 0}; the disk is where the form is negative
struct Circle {
  double A = 1;
  cplx B{0};
  double D = -1;

  static Circle disk(cplx center, double radius) { return {1.0, -center, std::norm(center) - radius * radius}; }
  static Circle exterior(cplx center, double radius) {
    Circle c = disk(center, radius);
    return {-c.A, -c.B, -c.D};
  }
  double det() const { return A * D - std::norm(B); }
  double value(const CVec<2>& v) const {
    return A * std::norm(v[0]) + 2.0 * (std::conj(B) * v[0] * std::conj(v[1])).real() + D * std::norm(v[1]);
  }
  // sign of the form at the unit representative
  double value(const CP1& p) const { return value(p.c); }
  bool inside(const CP1& p, double tol = 0) const { return value(p) < -tol; }
};

struct CirclePair {
  Circle C, D;
};

struct GroupSpec {
  int rank = 0;
  std::vector<Mat2> generators;
  std::vector<Mat2> deformation;  // u(s_i), identity when constant
  std::optional<std::vector<CirclePair>> schottky;

  static GroupSpec make(std::vector<Mat2> gens, std::vector<Mat2> def = {}) {
    GroupSpec s;
    s.rank = static_cast<int>(gens.size());
    if (def.empty()) def.assign(gens.size(), Mat2::identity());
    s.generators = std::move(gens);
    s.deformation = std::move(def);
    return s;
  }

  void validate(double tol = kUnimodularTol) const {
    if (rank < 1 || generators.size() != static_cast<std::size_t>(rank) ||
        deformation.size() != static_cast<std::size_t>(rank))
      throw Error(Errc::Schema, "generator/deformation count must equal rank");
    for (const auto& m : generators) require_sl2(m, tol);
    for (const auto& m : deformation) require_sl2(m, tol);
    if (schottky) {
      if (schottky->size() != static_cast<std::size_t>(rank)) throw Error(Errc::Schema, "one circle pair per generator");
      for (const auto& p : *schottky)
        if (!(p.C.det() < 0) || !(p.D.det() < 0)) throw Error(Errc::Schema, "degenerate circle");
    }
  }

  // (rho(s), u(s)) for a signed letter
  PairElement letter(int l) const {
    const std::size_t k = static_cast<std::size_t>(std::abs(l) - 1);
    return l > 0 ? PairElement(generators[k], deformation[k]) : PairElement(generators[k].adj(), deformation[k].adj());
  }

  PairElement value(const Word& w) const {
    PairElement p;
    for (int l : w) p = p * letter(l);
    return p;
  }
};

// letters in enumeration order 1, -1, 2, -2, ...
inline std::vector<int> letters(int rank) {
  std::vector<int> out;
  for (int k = 1; k <= rank; ++k) {
    out.push_back(k);
    out.push_back(-k);
  }
  return out;
}

inline std::uint64_t word_count(int rank, int maxLen) {
  std::uint64_t total = 1, layer = 2 * static_cast<std::uint64_t>(rank);
  for (int k = 1; k <= maxLen; ++k) {
    total += layer;
    layer *= 2 * static_cast<std::uint64_t>(rank) - 1;
  }
  return total;
}

inline std::string word_string(const Word& w) {
  if (w.empty()) return "e";
  std::string s;
  for (int l : w) {
    const char c = static_cast<char>('a' + std::abs(l) - 1);
    s += l > 0 ? c : static_cast<char>(c - 'a' + 'A');
  }
  return s;
}

struct WordEntry {
  Word word;
  PairElement value;
};

inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

namespace detail {

template <class R, class F>
void word_dfs(const GroupSpec& spec, const std::vector<int>& alphabet, Word& w, const PairElement& val, int maxLen,
              std::vector<std::vector<R>>& buckets, F& fn) {
  buckets[w.size()].push_back(fn(static_cast<const Word&>(w), val));
  if (static_cast<int>(w.size()) == maxLen) return;
  for (int l : alphabet) {
    if (!w.empty() && w.back() == -l) continue;
    w.push_back(l);
    word_dfs<R>(spec, alphabet, w, val * spec.letter(l), maxLen, buckets, fn);
    w.pop_back();
  }
}

}  // namespace detail

// fn(word, value) over the reduced word ball, results in length-then-lexicographic order.
// Subtrees below each two-letter prefix run in parallel; fn must be thread-safe.
template <class F>
auto map_words(const GroupSpec& spec, int maxLen, F fn, unsigned threads = 0)
    -> std::vector<decltype(fn(std::declval<const Word&>(), std::declval<const PairElement&>()))> {
  using R = decltype(fn(std::declval<const Word&>(), std::declval<const PairElement&>()));
  const std::vector<int> alphabet = letters(spec.rank);
  std::vector<R> out;
  out.reserve(static_cast<std::size_t>(word_count(spec.rank, std::max(0, maxLen))));
  if (maxLen < 0) return out;
  const int seedLen = std::min(2, maxLen);

  std::vector<Word> seeds{{}};
  for (int len = 0; len < seedLen; ++len) {
    for (const auto& s : seeds) out.push_back(fn(s, spec.value(s)));
    std::vector<Word> next;
    for (const auto& s : seeds)
      for (int l : alphabet) {
        if (!s.empty() && s.back() == -l) continue;
        Word w = s;
        w.push_back(l);
        next.push_back(std::move(w));
      }
    seeds = std::move(next);
  }

  std::vector<std::vector<std::vector<R>>> results(seeds.size());
  std::atomic<std::size_t> cursor{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = cursor.fetch_add(1);
      if (i >= seeds.size()) return;
      std::vector<std::vector<R>> buckets(static_cast<std::size_t>(maxLen + 1));
      Word w = seeds[i];
      F local = fn;
      detail::word_dfs<R>(spec, alphabet, w, spec.value(w), maxLen, buckets, local);
      results[i] = std::move(buckets);
    }
  };
  const unsigned n = std::min<unsigned>(resolve_threads(threads), static_cast<unsigned>(seeds.size()));
  if (n <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (int len = seedLen; len <= maxLen; ++len)
    for (auto& r : results)
      for (auto& x : r[static_cast<std::size_t>(len)]) out.push_back(std::move(x));
  return out;
}

inline std::vector<WordEntry> enumerate_words(const GroupSpec& spec, int maxLen, unsigned threads = 0) {
  return map_words(
      spec, maxLen, [](const Word& w, const PairElement& v) { return WordEntry{w, PairElement(v.g, v.h, w)}; },
      threads);
}

}  // namespace orthoklein
