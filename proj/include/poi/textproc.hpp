#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace poi {

inline constexpr std::string_view kUrlToken = "<url>";
inline constexpr std::string_view kUserToken = "<user>";
inline constexpr std::string_view kUnknownToken = "<unk>";

namespace textproc_detail {

inline bool is_ascii_word(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
         c == '_';
}
inline bool is_ascii_alnum(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}
inline bool is_ascii_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Decodes one UTF-8 sequence; malformed bytes decode as themselves, length 1.
inline char32_t decode_utf8(std::string_view s, std::size_t i, std::size_t& len) {
  const unsigned char c0 = static_cast<unsigned char>(s[i]);
  len = 1;
  if (c0 < 0x80) return c0;
  int extra = 0;
  char32_t cp = 0;
  if ((c0 & 0xE0) == 0xC0) { extra = 1; cp = c0 & 0x1F; }
  else if ((c0 & 0xF0) == 0xE0) { extra = 2; cp = c0 & 0x0F; }
  else if ((c0 & 0xF8) == 0xF0) { extra = 3; cp = c0 & 0x07; }
  else return c0;
  if (i + static_cast<std::size_t>(extra) >= s.size()) return c0;
  for (int k = 1; k <= extra; ++k) {
    const unsigned char ck = static_cast<unsigned char>(s[i + static_cast<std::size_t>(k)]);
    if ((ck & 0xC0) != 0x80) return c0;
    cp = (cp << 6) | (ck & 0x3F);
  }
  len = static_cast<std::size_t>(extra) + 1;
  return cp;
}

inline bool is_emoji_base(char32_t cp) {
  return (cp >= 0x1F000 && cp <= 0x1FAFF) ||  // pictographs, transport, supplemental
         (cp >= 0x2600 && cp <= 0x27BF) ||    // misc symbols, dingbats
         (cp >= 0x2B00 && cp <= 0x2BFF) ||    // stars, arrows
         (cp >= 0x1F1E6 && cp <= 0x1F1FF);    // regional indicators
}
inline bool is_regional_indicator(char32_t cp) { return cp >= 0x1F1E6 && cp <= 0x1F1FF; }
inline bool is_emoji_joiner(char32_t cp) {
  return cp == 0xFE0E || cp == 0xFE0F ||            // variation selectors
         (cp >= 0x1F3FB && cp <= 0x1F3FF);          // skin tone modifiers
}
inline bool is_unicode_space(char32_t cp) { return cp == 0x00A0 || (cp >= 0x2000 && cp <= 0x200B) || cp == 0x3000; }
inline bool is_unicode_punct(char32_t cp) {
  return (cp >= 0x00A1 && cp <= 0x00BF) || (cp >= 0x2010 && cp <= 0x206F);
}

// Word character for tokenization: ASCII [A-Za-z0-9_] or any non-ASCII
// codepoint that is not emoji, punctuation, or whitespace.
inline bool is_word_cp(char32_t cp) {
  if (cp < 0x80) return is_ascii_word(static_cast<unsigned char>(cp));
  return !is_emoji_base(cp) && !is_emoji_joiner(cp) && !is_unicode_space(cp) &&
         !is_unicode_punct(cp) && cp != 0x200D;
}

inline bool starts_with_ci(std::string_view s, std::size_t i, std::string_view prefix) {
  if (i + prefix.size() > s.size()) return false;
  for (std::size_t k = 0; k < prefix.size(); ++k) {
    if (std::tolower(static_cast<unsigned char>(s[i + k])) != prefix[k]) return false;
  }
  return true;
}

// URL match: scheme-prefixed, www.-prefixed, or t.co short links, at a
// non-word boundary, running to the next whitespace. `prev` is the character
// that precedes the match in the string being produced ('\0' at the start).
inline std::size_t match_url(std::string_view s, std::size_t i, char prev) {
  const unsigned char p = static_cast<unsigned char>(prev);
  if (p != 0 && (is_ascii_alnum(p) || p == '.' || p == '/')) return 0;
  if (!starts_with_ci(s, i, "http://") && !starts_with_ci(s, i, "https://") &&
      !starts_with_ci(s, i, "www.") && !starts_with_ci(s, i, "t.co/"))
    return 0;
  std::size_t j = i;
  while (j < s.size() && !is_ascii_space(static_cast<unsigned char>(s[j]))) ++j;
  return j - i;
}

// Mention match: '@' followed by word characters, at a non-word boundary.
inline std::size_t match_mention(std::string_view s, std::size_t i, char prev) {
  if (s[i] != '@') return 0;
  if (is_ascii_word(static_cast<unsigned char>(prev))) return 0;
  std::size_t j = i + 1;
  while (j < s.size() && is_ascii_word(static_cast<unsigned char>(s[j]))) ++j;
  return j > i + 1 ? j - i : 0;
}

inline bool is_emoticon_eyes(char c) { return c == ':' || c == ';' || c == '=' || c == '8'; }
inline bool is_emoticon_nose(char c) { return c == '-' || c == 'o' || c == '*' || c == '\''; }
inline bool is_forward_mouth(char c) {
  return c == ')' || c == '(' || c == ']' || c == '[' || c == 'd' || c == 'D' || c == 'p' ||
         c == 'P' || c == 'o' || c == 'O' || c == '/' || c == '\\' || c == '}' || c == '{' ||
         c == '|' || c == '@' || c == '*' || c == '3';
}
inline bool is_reverse_mouth(char c) {
  return c == ')' || c == '(' || c == ']' || c == '[' || c == 'd' || c == 'D' || c == '/' ||
         c == '\\' || c == '}' || c == '{' || c == '|';
}

// Western emoticons: "<3", eyes[-nose]mouth+ (":-)", ";P", ":)))"), and the
// reversed form ("(-:", "D:"). Only matched at a non-alnum boundary; a letter
// or digit mouth must not be followed by another alnum, so ":Dog" is not an
// emoticon while ":D" is.
inline std::size_t match_emoticon(std::string_view s, std::size_t i, char prev) {
  if (is_ascii_alnum(static_cast<unsigned char>(prev))) return 0;
  const std::size_t n = s.size();

  if (s[i] == '<' && i + 1 < n && s[i + 1] == '3') {
    std::size_t j = i + 2;
    while (j < n && s[j] == '3') ++j;
    return j - i;
  }

  if (is_emoticon_eyes(s[i])) {
    std::size_t j = i + 1;
    if (j < n && is_emoticon_nose(s[j]) && j + 1 < n && is_forward_mouth(s[j + 1])) ++j;
    if (j < n && is_forward_mouth(s[j])) {
      const char mouth = s[j];
      std::size_t k = j + 1;
      while (k < n && s[k] == mouth) ++k;
      if (is_ascii_alnum(static_cast<unsigned char>(mouth)) && k < n &&
          is_ascii_alnum(static_cast<unsigned char>(s[k])))
        return 0;
      return k - i;
    }
    return 0;
  }

  if (is_reverse_mouth(s[i])) {
    std::size_t j = i + 1;
    if (j < n && is_emoticon_nose(s[j]) && j + 1 < n && is_emoticon_eyes(s[j + 1])) ++j;
    if (j < n && is_emoticon_eyes(s[j])) {
      std::size_t k = j + 1;
      if (k < n && is_ascii_alnum(static_cast<unsigned char>(s[k]))) return 0;
      return k - i;
    }
    return 0;
  }
  return 0;
}

}  // namespace textproc_detail

// Lowercases text, replaces URLs with "<url>" and @-mentions with "<user>",
// and leaves emoticons, emoji, and punctuation in place. Emoticon characters
// keep their case (":D" stays ":D"). Total and idempotent.
inline std::string normalize(std::string_view text) {
  namespace td = textproc_detail;
  std::string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    // Boundary checks look at the output so far: what precedes a candidate
    // after earlier substitutions is what matters, and it keeps the function
    // idempotent.
    const char prev = out.empty() ? '\0' : out.back();
    if (std::size_t len = td::match_url(text, i, prev); len > 0) {
      out += kUrlToken;
      i += len;
      continue;
    }
    if (std::size_t len = td::match_mention(text, i, prev); len > 0) {
      out += kUserToken;
      i += len;
      continue;
    }
    if (std::size_t len = td::match_emoticon(text, i, prev); len > 0) {
      out.append(text.substr(i, len));
      i += len;
      continue;
    }
    const unsigned char c = static_cast<unsigned char>(text[i]);
    out += c < 0x80 ? static_cast<char>(std::tolower(c)) : text[i];
    ++i;
  }
  return out;
}

// Splits normalized text into tokens. Rule order: placeholder > hashtag >
// emoticon > emoji > word (internal apostrophes kept) > punctuation run
// (repeats of one mark, e.g. "!!!").
inline std::vector<std::string> tokenize(std::string_view text) {
  namespace td = textproc_detail;
  std::vector<std::string> tokens;
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    if (td::is_ascii_space(c)) {
      ++i;
      continue;
    }
    if (c >= 0x80) {
      std::size_t len = 0;
      const char32_t cp = td::decode_utf8(text, i, len);
      if (td::is_unicode_space(cp)) {
        i += len;
        continue;
      }
    }

    if (c == '<') {
      bool matched = false;
      for (std::string_view ph : {kUrlToken, kUserToken, kUnknownToken}) {
        if (text.substr(i, ph.size()) == ph) {
          tokens.emplace_back(ph);
          i += ph.size();
          matched = true;
          break;
        }
      }
      if (matched) continue;
    }

    if (c == '#' && i + 1 < n) {
      std::size_t len1 = 0;
      const char32_t cp1 = td::decode_utf8(text, i + 1, len1);
      if (td::is_word_cp(cp1)) {
        std::size_t j = i + 1;
        while (j < n) {
          std::size_t len = 0;
          const char32_t cp = td::decode_utf8(text, j, len);
          if (!td::is_word_cp(cp)) break;
          j += len;
        }
        tokens.emplace_back(text.substr(i, j - i));
        i = j;
        continue;
      }
    }

    if (std::size_t len = td::match_emoticon(text, i, i > 0 ? text[i - 1] : '\0'); len > 0) {
      tokens.emplace_back(text.substr(i, len));
      i += len;
      continue;
    }

    std::size_t cp_len = 0;
    const char32_t cp = td::decode_utf8(text, i, cp_len);

    if (td::is_emoji_base(cp)) {
      std::size_t j = i + cp_len;
      if (td::is_regional_indicator(cp) && j < n) {
        std::size_t len2 = 0;
        if (td::is_regional_indicator(td::decode_utf8(text, j, len2))) j += len2;  // flag pair
      }
      while (j < n) {
        std::size_t len2 = 0;
        const char32_t cp2 = td::decode_utf8(text, j, len2);
        if (td::is_emoji_joiner(cp2)) {
          j += len2;
        } else if (cp2 == 0x200D && j + len2 < n) {
          std::size_t len3 = 0;
          const char32_t cp3 = td::decode_utf8(text, j + len2, len3);
          if (!td::is_emoji_base(cp3)) break;
          j += len2 + len3;
        } else {
          break;
        }
      }
      tokens.emplace_back(text.substr(i, j - i));
      i = j;
      continue;
    }

    if (td::is_word_cp(cp)) {
      std::size_t j = i + cp_len;
      while (j < n) {
        std::size_t len = 0;
        const char32_t wcp = td::decode_utf8(text, j, len);
        if (td::is_word_cp(wcp)) {
          j += len;
          continue;
        }
        if (wcp == '\'' || wcp == 0x2019) {  // internal apostrophe: it's, don't
          if (j + len < n) {
            std::size_t len2 = 0;
            const char32_t next = td::decode_utf8(text, j + len, len2);
            if (td::is_word_cp(next)) {
              j += len + len2;
              continue;
            }
          }
        }
        break;
      }
      tokens.emplace_back(text.substr(i, j - i));
      i = j;
      continue;
    }

    // Punctuation run: one mark, possibly repeated.
    std::size_t j = i + cp_len;
    while (j < n) {
      std::size_t len = 0;
      if (td::decode_utf8(text, j, len) != cp) break;
      j += len;
    }
    tokens.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return tokens;
}

// Tokenized tweet with its source id.
struct TokenSequence {
  std::string tweet_id;
  std::vector<std::string> tokens;
};

// Training-split vocabulary: tokens that occur in at least min_tweet_freq
// distinct tweets. Counts are per-tweet presence, not raw occurrences.
struct Vocabulary {
  std::unordered_map<std::string, int> tweet_count;  // retained tokens only
  std::string unknown_symbol = std::string(kUnknownToken);
  int min_tweet_freq = 5;

  bool contains(std::string_view token) const {
    return tweet_count.find(std::string(token)) != tweet_count.end();
  }
};

inline Vocabulary build_vocab(const std::vector<TokenSequence>& train_tweets,
                              int min_tweet_freq = 5) {
  if (train_tweets.empty()) throw std::invalid_argument("build_vocab: empty training set");
  std::unordered_map<std::string, int> presence;
  std::unordered_set<std::string_view> seen_in_tweet;
  for (const TokenSequence& seq : train_tweets) {
    seen_in_tweet.clear();
    for (const std::string& tok : seq.tokens)
      if (seen_in_tweet.insert(tok).second) ++presence[tok];
  }
  Vocabulary v;
  v.min_tweet_freq = min_tweet_freq;
  for (auto& [tok, count] : presence) {
    // The unknown symbol itself is never retained, so it cannot collide with
    // a real token.
    if (count >= min_tweet_freq && tok != v.unknown_symbol) v.tweet_count.emplace(tok, count);
  }
  return v;
}

// Replaces out-of-vocabulary tokens with the unknown symbol. Length-preserving.
inline std::vector<std::string> apply_unk(const std::vector<std::string>& tokens,
                                          const Vocabulary& vocab) {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const std::string& tok : tokens)
    out.push_back(vocab.contains(tok) ? tok : vocab.unknown_symbol);
  return out;
}

inline TokenSequence apply_unk(const TokenSequence& seq, const Vocabulary& vocab) {
  return {seq.tweet_id, apply_unk(seq.tokens, vocab)};
}

// TSV export: token<TAB>tweet_count, descending count then lexicographic.
inline void write_vocab_tsv(std::ostream& out, const Vocabulary& vocab) {
  std::vector<std::pair<std::string_view, int>> rows(vocab.tweet_count.begin(),
                                                     vocab.tweet_count.end());
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  for (const auto& [tok, count] : rows) out << tok << "\t" << count << "\n";
}

// normalize + tokenize for a whole corpus slice.
template <typename RecordRange>
std::vector<TokenSequence> process_corpus(const RecordRange& records) {
  std::vector<TokenSequence> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back({r.tweet_id, tokenize(normalize(r.text))});
  return out;
}

}  // namespace poi
