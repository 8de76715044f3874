#include "topictax/porter.h"

#include <array>
#include <utility>

namespace topictax {
namespace {

class Stemmer {
 public:
  explicit Stemmer(std::string_view word) : b_(word) {}

  std::string run() && {
    if (b_.size() <= 2) return std::move(b_);
    step1ab();
    step1c();
    step2();
    step3();
    step4();
    step5();
    return std::move(b_);
  }

 private:
  bool cons(size_t i) const {
    switch (b_[i]) {
      case 'a': case 'e': case 'i': case 'o': case 'u':
        return false;
      case 'y':
        return i == 0 ? true : !cons(i - 1);
      default:
        return true;
    }
  }

  // Number of VC sequences in b_[0, len).
  int measure(size_t len) const {
    int n = 0;
    size_t i = 0;
    while (true) {
      if (i >= len) return n;
      if (!cons(i)) break;
      ++i;
    }
    ++i;
    while (true) {
      while (true) {
        if (i >= len) return n;
        if (cons(i)) break;
        ++i;
      }
      ++i;
      ++n;
      while (true) {
        if (i >= len) return n;
        if (!cons(i)) break;
        ++i;
      }
      ++i;
    }
  }

  bool has_vowel(size_t len) const {
    for (size_t i = 0; i < len; ++i) {
      if (!cons(i)) return true;
    }
    return false;
  }

  bool double_cons(size_t len) const {
    if (len < 2) return false;
    if (b_[len - 1] != b_[len - 2]) return false;
    return cons(len - 1);
  }

  // cvc where the final c is not w, x or y.
  bool cvc(size_t len) const {
    if (len < 3) return false;
    if (!cons(len - 1) || cons(len - 2) || !cons(len - 3)) return false;
    char c = b_[len - 1];
    return c != 'w' && c != 'x' && c != 'y';
  }

  bool ends(std::string_view s) const {
    return b_.size() >= s.size() &&
           std::string_view(b_).substr(b_.size() - s.size()) == s;
  }

  size_t stem_len(std::string_view suffix) const { return b_.size() - suffix.size(); }

  void replace_suffix(std::string_view suffix, std::string_view with) {
    b_.resize(stem_len(suffix));
    b_.append(with);
  }

  void step1ab() {
    if (ends("sses")) {
      replace_suffix("sses", "ss");
    } else if (ends("ies")) {
      replace_suffix("ies", "i");
    } else if (ends("ss")) {
      // unchanged
    } else if (ends("s")) {
      b_.pop_back();
    }

    if (ends("eed")) {
      if (measure(stem_len("eed")) > 0) b_.pop_back();
      return;
    }
    bool stripped = false;
    if (ends("ed") && has_vowel(stem_len("ed"))) {
      b_.resize(stem_len("ed"));
      stripped = true;
    } else if (ends("ing") && has_vowel(stem_len("ing"))) {
      b_.resize(stem_len("ing"));
      stripped = true;
    }
    if (!stripped) return;

    if (ends("at")) {
      b_.append("e");
    } else if (ends("bl")) {
      b_.append("e");
    } else if (ends("iz")) {
      b_.append("e");
    } else if (double_cons(b_.size())) {
      char c = b_.back();
      if (c != 'l' && c != 's' && c != 'z') b_.pop_back();
    } else if (measure(b_.size()) == 1 && cvc(b_.size())) {
      b_.append("e");
    }
  }

  void step1c() {
    if (ends("y") && has_vowel(b_.size() - 1)) b_.back() = 'i';
  }

  using Rule = std::pair<std::string_view, std::string_view>;

  // The first rule whose suffix matches decides; its replacement applies
  // only when the remaining stem has measure > min_measure.
  template <size_t N>
  void apply_first(const std::array<Rule, N>& rules, int min_measure) {
    for (const auto& [suffix, with] : rules) {
      if (!ends(suffix)) continue;
      if (measure(stem_len(suffix)) > min_measure) replace_suffix(suffix, with);
      return;
    }
  }

  void step2() {
    static constexpr std::array<Rule, 20> kRules{{
        {"ational", "ate"}, {"tional", "tion"}, {"enci", "ence"},
        {"anci", "ance"},   {"izer", "ize"},    {"abli", "able"},
        {"alli", "al"},     {"entli", "ent"},   {"eli", "e"},
        {"ousli", "ous"},   {"ization", "ize"}, {"ation", "ate"},
        {"ator", "ate"},    {"alism", "al"},    {"iveness", "ive"},
        {"fulness", "ful"}, {"ousness", "ous"}, {"aliti", "al"},
        {"iviti", "ive"},   {"biliti", "ble"},
    }};
    apply_first(kRules, 0);
  }

  void step3() {
    static constexpr std::array<Rule, 7> kRules{{
        {"icate", "ic"}, {"ative", ""}, {"alize", "al"}, {"iciti", "ic"},
        {"ical", "ic"},  {"ful", ""},   {"ness", ""},
    }};
    apply_first(kRules, 0);
  }

  void step4() {
    static constexpr std::array<std::string_view, 19> kSuffixes{
        "al",   "ance", "ence", "er",  "ic",  "able", "ible",
        "ant",  "ement", "ment", "ent", "ion", "ou",  "ism",
        "ate",  "iti",  "ous",  "ive", "ize"};
    for (std::string_view suffix : kSuffixes) {
      if (!ends(suffix)) continue;
      size_t len = stem_len(suffix);
      if (measure(len) <= 1) return;
      if (suffix == "ion" && !(len > 0 && (b_[len - 1] == 's' || b_[len - 1] == 't'))) {
        return;
      }
      b_.resize(len);
      return;
    }
  }

  void step5() {
    if (ends("e")) {
      size_t len = b_.size() - 1;
      int m = measure(len);
      if (m > 1 || (m == 1 && !cvc(len))) b_.pop_back();
    }
    if (ends("ll") && measure(b_.size()) > 1) b_.pop_back();
  }

  std::string b_;
};

}  // namespace

std::string porter_stem(std::string_view word) { return Stemmer(word).run(); }

}  // namespace topictax
