#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "sglab/rng.hpp"

// Finite words over a small alphabet and one-sided infinite symbol streams.
//
// Conventions used throughout the library:
//  * A word w = i0 i1 ... i{k-1} lists symbols in the order they are consumed
//    along an orbit: i0 acts first.  Composing the word's maps therefore
//    applies the RIGHTMOST symbol of the composition-order word first; see
//    system.hpp.
//  * w' is "below" w in the suffix order when w ends with w' (w = w'' w').
//  * The distance between two streams is 2^-j where j is the first index at
//    which they disagree.

namespace sglab {

constexpr std::size_t kWordEnumerationBudget = std::size_t{1} << 20;

struct Word {
    std::vector<std::uint8_t> symbols;
    int alphabet = 2;

    Word() = default;
    Word(std::vector<std::uint8_t> s, int m) : symbols(std::move(s)), alphabet(m) {
        for (auto c : symbols)
            if (c >= alphabet) throw std::invalid_argument("word symbol out of alphabet range");
    }

    std::size_t size() const { return symbols.size(); }
    bool empty() const { return symbols.empty(); }
    std::uint8_t operator[](std::size_t i) const { return symbols[i]; }

    bool operator==(const Word& o) const {
        return alphabet == o.alphabet && symbols == o.symbols;
    }
};

inline Word word_from_string(const std::string& digits, int m) {
    if (m < 1 || m > 10) throw std::invalid_argument("alphabet size must be in [1,10] for digit serialization");
    std::vector<std::uint8_t> s;
    s.reserve(digits.size());
    for (char c : digits) {
        if (c < '0' || c > '9') throw std::invalid_argument(std::string("invalid word digit '") + c + "'");
        int v = c - '0';
        if (v >= m) throw std::invalid_argument("word digit exceeds alphabet");
        s.push_back(std::uint8_t(v));
    }
    return Word(std::move(s), m);
}

inline std::string to_string(const Word& w) {
    std::string out;
    out.reserve(w.size());
    for (auto c : w.symbols) out.push_back(char('0' + c));
    return out;
}

inline Word reverse(const Word& w) {
    Word r = w;
    for (std::size_t i = 0, j = r.symbols.size(); i + 1 < j; ++i, --j)
        std::swap(r.symbols[i], r.symbols[j - 1]);
    return r;
}

inline Word concat(const Word& a, const Word& b) {
    if (a.alphabet != b.alphabet) throw std::invalid_argument("alphabet mismatch in concat");
    Word c = a;
    c.symbols.insert(c.symbols.end(), b.symbols.begin(), b.symbols.end());
    return c;
}

// True when lo is a suffix of hi (lo "divides" hi from the right).
inline bool suffix_order(const Word& lo, const Word& hi) {
    if (lo.alphabet != hi.alphabet) throw std::invalid_argument("alphabet mismatch in suffix_order");
    if (lo.size() > hi.size()) return false;
    const std::size_t off = hi.size() - lo.size();
    for (std::size_t i = 0; i < lo.size(); ++i)
        if (lo[i] != hi[off + i]) return false;
    return true;
}

// True when pre is a prefix of w; equivalent to reverse(pre) <= reverse(w)
// in the suffix order.  Used by variable-length covers.
inline bool prefix_order(const Word& pre, const Word& w) {
    if (pre.alphabet != w.alphabet) throw std::invalid_argument("alphabet mismatch in prefix_order");
    if (pre.size() > w.size()) return false;
    for (std::size_t i = 0; i < pre.size(); ++i)
        if (pre[i] != w[i]) return false;
    return true;
}

inline std::size_t checked_pow(std::size_t base, std::size_t exp, std::size_t cap) {
    std::size_t v = 1;
    for (std::size_t i = 0; i < exp; ++i) {
        if (v > cap / (base ? base : 1)) return cap + 1;
        v *= base;
        if (v > cap) return cap + 1;
    }
    return v;
}

// All words of length n in lexicographic order (symbol 0 sorts first).
inline std::vector<Word> enumerate_words(int m, std::size_t n,
                                         std::size_t budget = kWordEnumerationBudget) {
    if (m < 1) throw std::invalid_argument("alphabet size must be positive");
    const std::size_t total = checked_pow(std::size_t(m), n, budget);
    if (total > budget)
        throw std::length_error("word enumeration exceeds budget; sample instead");
    std::vector<Word> out;
    out.reserve(total);
    std::vector<std::uint8_t> cur(n, 0);
    for (std::size_t idx = 0; idx < total; ++idx) {
        out.emplace_back(cur, m);
        for (std::size_t pos = n; pos-- > 0;) {
            if (++cur[pos] < m) break;
            cur[pos] = 0;
        }
    }
    return out;
}

inline std::vector<Word> sample_words(int m, std::size_t n, std::size_t count,
                                      std::uint64_t seed) {
    if (m < 1) throw std::invalid_argument("alphabet size must be positive");
    Rng rng(seed);
    std::vector<Word> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::vector<std::uint8_t> s(n);
        for (auto& c : s) c = std::uint8_t(rng.below(std::uint64_t(m)));
        out.emplace_back(std::move(s), m);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Itineraries: infinite driving sequences.  Two storage forms are supported,
// an eventually periodic one (head then repeating period) and a seeded
// Bernoulli stream with random access by index.

struct BernoulliTail {
    std::vector<double> probs;
    std::uint64_t seed = 0;
    std::uint64_t skip = 0;  // how many stream symbols were consumed by shifts
};

class Itinerary {
  public:
    Itinerary() : alphabet_(1), head_{}, tail_(std::vector<std::uint8_t>{0}) {}

    static Itinerary periodic(Word head, Word period) {
        if (head.alphabet != period.alphabet)
            throw std::invalid_argument("alphabet mismatch in itinerary");
        if (period.empty()) throw std::invalid_argument("itinerary period must be nonempty");
        Itinerary it;
        it.alphabet_ = period.alphabet;
        it.head_ = std::move(head.symbols);
        it.tail_ = std::move(period.symbols);
        return it;
    }

    static Itinerary constant(int symbol, int m) {
        return periodic(Word({}, m), Word({std::uint8_t(symbol)}, m));
    }

    static Itinerary bernoulli(std::vector<double> probs, std::uint64_t seed) {
        if (probs.empty()) throw std::invalid_argument("bernoulli itinerary needs probabilities");
        double s = 0;
        for (double p : probs) {
            if (p < 0) throw std::invalid_argument("negative probability");
            s += p;
        }
        if (std::abs(s - 1.0) > 1e-9) throw std::invalid_argument("probabilities must sum to 1");
        Itinerary it;
        it.alphabet_ = int(probs.size());
        it.tail_ = BernoulliTail{std::move(probs), seed, 0};
        return it;
    }

    int alphabet() const { return alphabet_; }
    bool is_stream() const { return std::holds_alternative<BernoulliTail>(tail_); }

    std::uint8_t symbol(std::size_t t) const {
        if (t < head_.size()) return head_[t];
        const std::size_t u = t - head_.size();
        if (const auto* per = std::get_if<std::vector<std::uint8_t>>(&tail_))
            return (*per)[u % per->size()];
        const auto& b = std::get<BernoulliTail>(tail_);
        const double x = double(mix64(b.seed, b.skip + u) >> 11) * 0x1.0p-53;
        double acc = 0;
        for (std::size_t j = 0; j + 1 < b.probs.size(); ++j) {
            acc += b.probs[j];
            if (x < acc) return std::uint8_t(j);
        }
        return std::uint8_t(b.probs.size() - 1);
    }

    Word prefix(std::size_t n) const {
        std::vector<std::uint8_t> s(n);
        for (std::size_t t = 0; t < n; ++t) s[t] = symbol(t);
        return Word(std::move(s), alphabet_);
    }

    // Drop the first symbol.
    Itinerary shifted() const {
        Itinerary it = *this;
        if (!it.head_.empty()) {
            it.head_.erase(it.head_.begin());
            return it;
        }
        if (auto* per = std::get_if<std::vector<std::uint8_t>>(&it.tail_)) {
            std::rotate(per->begin(), per->begin() + 1, per->end());
        } else {
            std::get<BernoulliTail>(it.tail_).skip += 1;
        }
        return it;
    }

    Itinerary shifted(std::size_t n) const {
        Itinerary it = *this;
        const std::size_t from_head = std::min(n, it.head_.size());
        it.head_.erase(it.head_.begin(), it.head_.begin() + from_head);
        std::size_t rest = n - from_head;
        if (rest == 0) return it;
        if (auto* per = std::get_if<std::vector<std::uint8_t>>(&it.tail_)) {
            std::rotate(per->begin(), per->begin() + (rest % per->size()), per->end());
        } else {
            std::get<BernoulliTail>(it.tail_).skip += rest;
        }
        return it;
    }

    // Prepends symbols (used when assembling itineraries from blocks).
    static Itinerary with_head(Word head, const Itinerary& tail_source) {
        Itinerary it = tail_source;
        if (head.alphabet != it.alphabet_)
            throw std::invalid_argument("alphabet mismatch in itinerary head");
        it.head_.insert(it.head_.begin(), head.symbols.begin(), head.symbols.end());
        return it;
    }

    const std::vector<std::uint8_t>& head() const { return head_; }

    std::string serialize() const {
        std::string out;
        if (const auto* per = std::get_if<std::vector<std::uint8_t>>(&tail_)) {
            for (auto c : head_) out.push_back(char('0' + c));
            out.push_back('|');
            for (auto c : *per) out.push_back(char('0' + c));
            return out;
        }
        const auto& b = std::get<BernoulliTail>(tail_);
        out = "bern:";
        for (std::size_t i = 0; i < b.probs.size(); ++i) {
            if (i) out.push_back(',');
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.17g", b.probs[i]);
            out += buf;
        }
        out += ":" + std::to_string(b.seed);
        if (b.skip) out += ":" + std::to_string(b.skip);
        return out;
    }

    static Itinerary parse(const std::string& text, int m) {
        if (text.rfind("bern:", 0) == 0) {
            std::size_t a = 5, b = text.find(':', a);
            if (b == std::string::npos) throw std::invalid_argument("malformed bernoulli itinerary");
            std::vector<double> probs;
            std::size_t pos = a;
            while (pos < b) {
                std::size_t comma = text.find(',', pos);
                if (comma == std::string::npos || comma > b) comma = b;
                probs.push_back(std::stod(text.substr(pos, comma - pos)));
                pos = comma + 1;
            }
            std::size_t c = text.find(':', b + 1);
            std::uint64_t seed = std::stoull(text.substr(b + 1, c == std::string::npos ? std::string::npos : c - b - 1));
            Itinerary it = bernoulli(std::move(probs), seed);
            if (c != std::string::npos)
                std::get<BernoulliTail>(it.tail_).skip = std::stoull(text.substr(c + 1));
            if (it.alphabet_ != m) throw std::invalid_argument("itinerary alphabet mismatch");
            return it;
        }
        const std::size_t bar = text.find('|');
        if (bar == std::string::npos)
            throw std::invalid_argument("itinerary must be 'head|period' or 'bern:...'");
        return periodic(word_from_string(text.substr(0, bar), m),
                        word_from_string(text.substr(bar + 1), m));
    }

  private:
    int alphabet_;
    std::vector<std::uint8_t> head_;
    std::variant<std::vector<std::uint8_t>, BernoulliTail> tail_;
};

// 2^-j with j the first disagreement index; 0 when the streams agree through
// the horizon (the resolution floor of this comparison).
inline double symbolic_distance(const Itinerary& a, const Itinerary& b,
                                std::size_t horizon = 64) {
    for (std::size_t j = 0; j < horizon; ++j)
        if (a.symbol(j) != b.symbol(j)) return std::ldexp(1.0, -int(j));
    return 0.0;
}

inline double symbolic_distance(const Word& a, const Word& b, std::size_t horizon = 64) {
    const std::size_t n = std::min({horizon, a.size(), b.size()});
    for (std::size_t j = 0; j < n; ++j)
        if (a[j] != b[j]) return std::ldexp(1.0, -int(j));
    if (a.size() != b.size() && n < horizon)
        return std::ldexp(1.0, -int(n));  // one stream ended: treat as disagreement
    return 0.0;
}

}  // namespace sglab
