#include "dialect/textnorm.hpp"

#include <algorithm>
#include <array>
#include <cstdio>

namespace dialect::text {
namespace {

struct CodepointRange {
    char32_t lo;
    char32_t hi;
};
struct AsciiFold {
    char32_t cp;
    const char* ascii;
};
struct CaseMapping {
    char32_t upper;
    char32_t lower;
};

#include "unicode_tables.inc"

template <std::size_t N>
bool in_ranges(const CodepointRange (&table)[N], char32_t cp) noexcept {
    auto it = std::upper_bound(std::begin(table), std::end(table), cp,
                               [](char32_t v, const CodepointRange& r) { return v < r.lo; });
    if (it == std::begin(table)) return false;
    --it;
    return cp <= it->hi;
}

constexpr char32_t kZwj = 0x200D;
constexpr char32_t kVs15 = 0xFE0E;
constexpr char32_t kVs16 = 0xFE0F;
constexpr char32_t kKeycap = 0x20E3;
constexpr char32_t kReplacement = 0xFFFD;

bool is_regional_indicator(char32_t cp) noexcept { return cp >= 0x1F1E6 && cp <= 0x1F1FF; }
bool is_tag(char32_t cp) noexcept { return cp >= 0xE0020 && cp <= 0xE007E; }
bool is_variation_selector(char32_t cp) noexcept { return cp == kVs15 || cp == kVs16; }
bool is_combining_mark(char32_t cp) noexcept {
    return (cp >= 0x0300 && cp <= 0x036F) || (cp >= 0x1AB0 && cp <= 0x1AFF) ||
           (cp >= 0x1DC0 && cp <= 0x1DFF) || (cp >= 0x20D0 && cp <= 0x20FF) ||
           (cp >= 0xFE20 && cp <= 0xFE2F);
}

// Invisible format and control characters that never form part of a token.
bool is_ignorable(char32_t cp) noexcept {
    return cp < 0x20 || (cp >= 0x7F && cp < 0xA0) || (cp >= 0x200B && cp <= 0x200F) ||
           (cp >= 0x2060 && cp <= 0x2064) || cp == 0xFEFF || (cp >= 0xFE00 && cp <= 0xFE0F) ||
           (cp >= 0xE0000 && cp <= 0xE007F) || cp == 0xAD;
}

bool is_ascii_alnum(char32_t cp) noexcept {
    return (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z') || (cp >= '0' && cp <= '9');
}
bool is_ascii_digit(char32_t cp) noexcept { return cp >= '0' && cp <= '9'; }

// Symbols that are Emoji but default to text presentation. Those in the
// Miscellaneous Symbols and Dingbats blocks (heart, smiling face, victory
// hand...) are read as emoji even without U+FE0F since tweet clients often
// omit it; the rest (digits, (c), arrows) need an explicit emoji selector.
bool text_default_reads_as_emoji(char32_t cp) noexcept { return cp >= 0x2600 && cp <= 0x27BF; }

// Length of one emoji element (no ZWJ continuation). `lenient` accepts any
// pictographic code point, used for elements after a ZWJ.
std::size_t element_length(std::u32string_view s, std::size_t p, bool lenient) noexcept {
    if (p >= s.size()) return 0;
    const char32_t c = s[p];
    const auto at = [&](std::size_t i) -> char32_t { return i < s.size() ? s[i] : 0; };

    if (is_regional_indicator(c)) return is_regional_indicator(at(p + 1)) ? 2 : 1;
    if (is_ascii_digit(c) || c == '#' || c == '*') {
        if (at(p + 1) == kVs16 && at(p + 2) == kKeycap) return 3;
        if (at(p + 1) == kKeycap) return 2;
        return 0;
    }
    if (is_skin_tone(c)) return 1;

    const bool pictographic = is_extended_pictographic(c) || is_emoji_presentation(c);
    if (!pictographic) return 0;
    if (!lenient) {
        const bool qualified = is_emoji_presentation(c) ||
                               (is_emoji_property(c) &&
                                (at(p + 1) == kVs16 || is_skin_tone(at(p + 1)) ||
                                 text_default_reads_as_emoji(c)));
        if (!qualified) return 0;
    }
    std::size_t n = 1;
    if (is_variation_selector(at(p + n))) ++n;
    if (is_skin_tone(at(p + n))) {
        ++n;
        if (at(p + n) == kVs16) ++n;
    }
    if (is_tag(at(p + n))) {
        while (is_tag(at(p + n))) ++n;
        if (at(p + n) == 0xE007F) ++n;
    }
    return n;
}

bool is_word_char(char32_t cp) noexcept {
    if (cp < 0x80) return is_ascii_alnum(cp) || cp == '_';
    return !is_whitespace(cp) && !is_punctuation(cp) && !is_ignorable(cp) &&
           !is_extended_pictographic(cp) && !is_emoji_presentation(cp);
}

// Pictographs that did not qualify as emoji (unselected arrows, trade mark
// sign...) are tokenized like punctuation.
bool is_symbol(char32_t cp) noexcept {
    return !is_word_char(cp) && !is_whitespace(cp) && !is_ignorable(cp) &&
           !is_combining_mark(cp) && !is_punctuation(cp);
}

char32_t to_lower(char32_t cp) noexcept {
    if (cp >= 'A' && cp <= 'Z') return cp + 32;
    if (cp < 0xC0) return cp;
    auto it = std::lower_bound(std::begin(kLowercase), std::end(kLowercase), cp,
                               [](const CaseMapping& m, char32_t v) { return m.upper < v; });
    return (it != std::end(kLowercase) && it->upper == cp) ? it->lower : cp;
}

bool is_upper(char32_t cp) noexcept { return to_lower(cp) != cp; }

const char* ascii_fold(char32_t cp) noexcept {
    auto it = std::lower_bound(std::begin(kAsciiFold), std::end(kAsciiFold), cp,
                               [](const AsciiFold& m, char32_t v) { return m.cp < v; });
    return (it != std::end(kAsciiFold) && it->cp == cp) ? it->ascii : nullptr;
}

bool equals_ascii_ci(std::u32string_view s, std::size_t pos, std::string_view lit) noexcept {
    if (pos + lit.size() > s.size()) return false;
    for (std::size_t i = 0; i < lit.size(); ++i) {
        char32_t c = s[pos + i];
        if (c >= 'A' && c <= 'Z') c += 32;
        if (c != static_cast<unsigned char>(lit[i])) return false;
    }
    return true;
}

void append_ascii(std::u32string& out, std::string_view lit) {
    for (char ch : lit) out.push_back(static_cast<unsigned char>(ch));
}

// Offset of the first URL prefix within [begin, end), or npos.
std::size_t find_url(std::u32string_view s, std::size_t begin, std::size_t end) noexcept {
    for (std::size_t i = begin; i < end; ++i) {
        for (std::string_view prefix : {"http://", "https://", "www."}) {
            if (i + prefix.size() <= end && equals_ascii_ci(s, i, prefix)) return i;
        }
    }
    return std::u32string_view::npos;
}

std::u32string mask_urls(std::u32string_view s) {
    std::u32string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (s[i] == ' ') {
            out.push_back(s[i++]);
            continue;
        }
        std::size_t end = i;
        while (end < s.size() && s[end] != ' ') ++end;
        const std::size_t hit = find_url(s, i, end);
        if (hit == std::u32string_view::npos) {
            out.append(s.substr(i, end - i));
        } else {
            out.append(s.substr(i, hit - i));
            append_ascii(out, kUrlMask);
        }
        i = end;
    }
    return out;
}

std::u32string mask_users(std::u32string_view s) {
    std::u32string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        if (const std::size_t n = emoji_length_at(s, i); n > 0) {
            out.append(s.substr(i, n));
            i += n;
            continue;
        }
        const bool boundary = i == 0 || (!is_word_char(s[i - 1]) && s[i - 1] != '@');
        if (s[i] == '@' && boundary && i + 1 < s.size() && is_word_char(s[i + 1]) &&
            emoji_length_at(s, i + 1) == 0) {
            std::size_t end = i + 1;
            while (end < s.size() && is_word_char(s[end]) && emoji_length_at(s, end) == 0) ++end;
            append_ascii(out, kUserMask);
            i = end;
        } else {
            out.push_back(s[i++]);
        }
    }
    return out;
}

std::u32string mask_numbers(std::u32string_view s) {
    std::u32string out;
    out.reserve(s.size());
    std::size_t i = 0;
    // keycaps start with a digit; keep them whole
    const auto digit = [&](std::size_t k) { return is_ascii_digit(s[k]) && emoji_length_at(s, k) == 0; };
    while (i < s.size()) {
        if (const std::size_t n = emoji_length_at(s, i); n > 0) {
            out.append(s.substr(i, n));
            i += n;
            continue;
        }
        if (!is_ascii_digit(s[i])) {
            out.push_back(s[i++]);
            continue;
        }
        std::size_t end = i;
        while (end < s.size() && digit(end)) ++end;
        while (end + 1 < s.size() && (s[end] == '.' || s[end] == ',') && digit(end + 1)) {
            ++end;
            while (end < s.size() && digit(end)) ++end;
        }
        // only standalone numbers; "covid19" or "w2" stay words
        const bool glued = (i > 0 && is_word_char(s[i - 1])) || (end < s.size() && is_word_char(s[end]));
        if (glued) {
            out.append(s.substr(i, end - i));
        } else {
            append_ascii(out, kNumberMask);
        }
        i = end;
    }
    return out;
}

std::u32string collapse_spaces(std::u32string_view s) {
    std::u32string out;
    out.reserve(s.size());
    for (char32_t c : s) {
        if (c == ' ') {
            if (!out.empty() && out.back() != ' ') out.push_back(' ');
        } else {
            out.push_back(c);
        }
    }
    if (!out.empty() && out.back() == ' ') out.pop_back();
    return out;
}

bool is_mask_literal(std::string_view s) noexcept {
    return s == kUserMask || s == kNumberMask || s == kEmojiMask || s == kUrlMask;
}

// Drives the shared token scanner. `on_token(begin, length, kind)`.
template <typename Fn>
void scan_tokens(std::u32string_view s, Fn&& on_token) {
    std::size_t i = 0;
    std::size_t word_start = std::u32string_view::npos;
    const auto flush_word = [&](std::size_t end) {
        if (word_start != std::u32string_view::npos) {
            on_token(word_start, end - word_start, TokenKind::word);
            word_start = std::u32string_view::npos;
        }
    };
    while (i < s.size()) {
        const char32_t c = s[i];
        if (const std::size_t n = emoji_length_at(s, i); n > 0) {
            flush_word(i);
            on_token(i, n, TokenKind::emoji);
            i += n;
        } else if (is_word_char(c) || (is_combining_mark(c) && word_start != std::u32string_view::npos)) {
            if (word_start == std::u32string_view::npos) word_start = i;
            ++i;
        } else if (is_punctuation(c) || is_symbol(c)) {
            flush_word(i);
            on_token(i, 1, TokenKind::punct);
            ++i;
        } else {
            // whitespace, ignorable format characters, stray marks
            flush_word(i);
            ++i;
        }
    }
    flush_word(s.size());
}

}  // namespace

NormalizationConfig NormalizationConfig::all() {
    NormalizationConfig c;
    c.lowercase = c.strip_diacritics = c.mask_users = c.mask_numbers = c.mask_emojis =
        c.mask_urls = c.keep_punctuation = true;
    return c;
}

NormalizationConfig NormalizationConfig::none() {
    NormalizationConfig c;
    c.lowercase = c.strip_diacritics = c.mask_users = c.mask_numbers = c.mask_emojis =
        c.mask_urls = false;
    c.keep_punctuation = true;
    return c;
}

std::u32string decode_utf8(std::string_view s) {
    std::u32string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        const auto b0 = static_cast<unsigned char>(s[i]);
        if (b0 < 0x80) {
            out.push_back(b0);
            ++i;
            continue;
        }
        int extra = 0;
        char32_t cp = 0;
        char32_t min = 0;
        if ((b0 & 0xE0) == 0xC0) {
            extra = 1, cp = b0 & 0x1F, min = 0x80;
        } else if ((b0 & 0xF0) == 0xE0) {
            extra = 2, cp = b0 & 0x0F, min = 0x800;
        } else if ((b0 & 0xF8) == 0xF0) {
            extra = 3, cp = b0 & 0x07, min = 0x10000;
        } else {
            out.push_back(kReplacement);
            ++i;
            continue;
        }
        if (i + extra >= s.size()) {
            out.push_back(kReplacement);
            ++i;
            continue;
        }
        bool ok = true;
        for (int k = 1; k <= extra; ++k) {
            const auto b = static_cast<unsigned char>(s[i + k]);
            if ((b & 0xC0) != 0x80) {
                ok = false;
                break;
            }
            cp = (cp << 6) | (b & 0x3F);
        }
        if (!ok || cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
            out.push_back(kReplacement);
            ++i;
            continue;
        }
        out.push_back(cp);
        i += extra + 1;
    }
    return out;
}

void append_utf8(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

std::string encode_utf8(std::u32string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char32_t c : s) append_utf8(out, c);
    return out;
}

bool is_emoji_presentation(char32_t cp) noexcept { return in_ranges(kEmojiPresentationRanges, cp); }
bool is_extended_pictographic(char32_t cp) noexcept {
    return in_ranges(kExtendedPictographicRanges, cp);
}
bool is_emoji_property(char32_t cp) noexcept { return in_ranges(kEmojiRanges, cp); }
bool is_skin_tone(char32_t cp) noexcept { return cp >= kSkinToneFirst && cp <= kSkinToneLast; }

bool is_whitespace(char32_t cp) noexcept {
    return cp == ' ' || (cp >= 0x09 && cp <= 0x0D) || cp == 0x85 || cp == 0xA0 ||
           cp == 0x1680 || (cp >= 0x2000 && cp <= 0x200A) || cp == 0x2028 || cp == 0x2029 ||
           cp == 0x202F || cp == 0x205F || cp == 0x3000;
}

bool is_punctuation(char32_t cp) noexcept {
    if (cp < 0x80) {
        return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
               (cp >= 0x5B && cp <= 0x60 && cp != '_') || (cp >= 0x7B && cp <= 0x7E);
    }
    if (cp >= 0xA1 && cp <= 0xBF) {
        // ª ² ³ µ ¹ º are letters or digits; soft hyphen is ignorable
        return cp != 0xAA && cp != 0xAD && cp != 0xB2 && cp != 0xB3 && cp != 0xB5 &&
               cp != 0xB9 && cp != 0xBA;
    }
    if (cp == 0xD7 || cp == 0xF7) return true;
    // General Punctuation through Miscellaneous Symbols and Arrows, less the
    // letter-like and number-form blocks; plus CJK punctuation and fullwidth forms.
    if (cp >= 0x2010 && cp <= 0x205E) return true;
    if (cp >= 0x20A0 && cp <= 0x20CF) return true;
    if (cp >= 0x2190 && cp <= 0x2BFF) return true;
    if (cp >= 0x2E00 && cp <= 0x2E7F) return true;
    if (cp >= 0x3001 && cp <= 0x303F) return true;
    if ((cp >= 0xFF01 && cp <= 0xFF0F) || (cp >= 0xFF1A && cp <= 0xFF20)) return true;
    return false;
}

std::size_t emoji_length_at(std::u32string_view s, std::size_t pos) noexcept {
    std::size_t n = element_length(s, pos, false);
    if (n == 0) return 0;
    while (pos + n + 1 < s.size() && s[pos + n] == kZwj) {
        const std::size_t next = element_length(s, pos + n + 1, true);
        if (next == 0) break;
        n += 1 + next;
    }
    return n;
}

bool contains_url(std::string_view s) noexcept {
    const auto lower = [](char c) { return (c >= 'A' && c <= 'Z') ? char(c + 32) : c; };
    for (std::string_view prefix : {"http://", "https://", "www."}) {
        auto it = std::search(s.begin(), s.end(), prefix.begin(), prefix.end(),
                              [&](char a, char b) { return lower(a) == b; });
        if (it != s.end()) return true;
    }
    return false;
}

std::string normalize(std::string_view text, const NormalizationConfig& config) {
    const std::u32string in = decode_utf8(text);
    std::u32string out;
    out.reserve(in.size() + 8);
    bool last_unknown = false;

    std::size_t i = 0;
    while (i < in.size()) {
        const char32_t c = in[i];
        if (const std::size_t n = emoji_length_at(in, i); n > 0) {
            if (config.mask_emojis) {
                out.push_back(' ');
                append_ascii(out, kEmojiMask);
                out.push_back(' ');
            } else {
                out.append(in, i, n);
            }
            i += n;
            last_unknown = false;
            continue;
        }
        ++i;
        if (is_whitespace(c)) {
            out.push_back(' ');
            last_unknown = false;
        } else if (is_ignorable(c)) {
            // dropped
        } else if (is_combining_mark(c)) {
            if (!config.strip_diacritics) out.push_back(c);
        } else if (is_punctuation(c) || is_symbol(c)) {
            out.push_back(config.keep_punctuation ? c : U' ');
            last_unknown = false;
        } else if (c < 0x80 || !config.strip_diacritics) {
            out.push_back(config.lowercase ? to_lower(c) : c);
            last_unknown = false;
        } else if (const char* folded = ascii_fold(c)) {
            const bool upper = !config.lowercase && is_upper(c);
            for (const char* p = folded; *p; ++p) {
                out.push_back(upper ? char32_t(*p - 32) : char32_t(*p));
            }
            last_unknown = false;
        } else {
            // outside every recognized class
            if (!last_unknown) append_ascii(out, kUnknownSymbol);
            last_unknown = true;
        }
    }

    out = collapse_spaces(out);
    if (config.mask_urls) out = mask_urls(out);
    if (config.mask_users) out = mask_users(out);
    if (config.mask_numbers) out = mask_numbers(out);
    return encode_utf8(out);
}

std::vector<Token> tokenize(std::string_view text) {
    const std::u32string s = decode_utf8(text);
    std::vector<Token> tokens;
    scan_tokens(s, [&](std::size_t begin, std::size_t len, TokenKind kind) {
        Token t{encode_utf8(std::u32string_view(s).substr(begin, len)), kind};
        if (kind == TokenKind::word && is_mask_literal(t.surface)) t.kind = TokenKind::mask;
        tokens.push_back(std::move(t));
    });
    return tokens;
}

std::size_t count_tokens(std::string_view text) {
    const std::u32string s = decode_utf8(text);
    std::size_t n = 0;
    scan_tokens(s, [&](std::size_t, std::size_t, TokenKind) { ++n; });
    return n;
}

std::u32string emoji_base(std::u32string_view grapheme) {
    if (grapheme.size() == 1 && is_skin_tone(grapheme[0])) return std::u32string(grapheme);
    std::u32string base;
    base.reserve(grapheme.size());
    for (char32_t c : grapheme) {
        if (!is_skin_tone(c) && !is_variation_selector(c)) base.push_back(c);
    }
    return base;
}

std::vector<EmojiOccurrence> extract_emojis(std::string_view text) {
    const std::u32string s = decode_utf8(text);
    std::vector<EmojiOccurrence> out;
    scan_tokens(s, [&](std::size_t begin, std::size_t len, TokenKind kind) {
        if (kind != TokenKind::emoji) return;
        const auto grapheme = std::u32string_view(s).substr(begin, len);
        EmojiOccurrence occ{emoji_base(grapheme), std::nullopt};
        if (!(len == 1 && is_skin_tone(grapheme[0]))) {
            auto it = std::find_if(grapheme.begin(), grapheme.end(), is_skin_tone);
            if (it != grapheme.end()) occ.skin_tone = *it;
        }
        out.push_back(std::move(occ));
    });
    return out;
}

std::string codepoint_notation(std::u32string_view s) {
    std::string out;
    std::array<char, 16> buf{};
    for (char32_t c : s) {
        if (!out.empty()) out.push_back(' ');
        std::snprintf(buf.data(), buf.size(), "U+%04X", static_cast<unsigned>(c));
        out += buf.data();
    }
    return out;
}

}  // namespace dialect::text
