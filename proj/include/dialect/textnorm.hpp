#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

/**
 * @file textnorm.hpp
 *
 * @brief Tweet text normalization, tokenization and emoji extraction.
 *
 * All functions take and return UTF-8. Invalid byte sequences decode to
 * U+FFFD. Every function here is pure and thread-safe.
 */

namespace dialect::text {

inline constexpr std::string_view kUserMask = "usr";
inline constexpr std::string_view kNumberMask = "0";
inline constexpr std::string_view kEmojiMask = "emo";
inline constexpr std::string_view kUrlMask = "_url";
/// Replacement for characters outside every recognized class when folding to ASCII.
inline constexpr std::string_view kUnknownSymbol = "_";

enum class TokenKind { word, emoji, punct, mask };

struct Token {
    std::string surface;
    TokenKind kind = TokenKind::word;

    bool operator==(const Token&) const = default;
};

struct NormalizationConfig {
    bool lowercase = true;
    /// Folds Latin letters to ASCII (ñ -> n) and replaces unknown symbols with "_".
    bool strip_diacritics = true;
    bool mask_users = true;
    bool mask_numbers = true;
    bool mask_emojis = false;
    bool mask_urls = true;
    /// When false, punctuation characters are dropped.
    bool keep_punctuation = true;

    /// Every flag on.
    static NormalizationConfig all();
    /// Every flag off: only whitespace is collapsed.
    static NormalizationConfig none();
};

/// Skin-tone (Fitzpatrick) modifiers U+1F3FB..U+1F3FF.
inline constexpr char32_t kSkinToneFirst = 0x1F3FB;
inline constexpr char32_t kSkinToneLast = 0x1F3FF;

struct EmojiOccurrence {
    /// The emoji grapheme with skin-tone modifiers and variation selectors removed.
    std::u32string base;
    /// First skin-tone modifier of the grapheme, if any. A standalone modifier
    /// is reported as its own base with no skin tone.
    std::optional<char32_t> skin_tone;

    bool operator==(const EmojiOccurrence&) const = default;
};

std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);
void append_utf8(std::string& out, char32_t cp);

bool is_emoji_presentation(char32_t cp) noexcept;
bool is_extended_pictographic(char32_t cp) noexcept;
bool is_emoji_property(char32_t cp) noexcept;
bool is_skin_tone(char32_t cp) noexcept;
bool is_whitespace(char32_t cp) noexcept;
bool is_punctuation(char32_t cp) noexcept;

/// Length (in code points) of the emoji grapheme starting at `pos`, or 0 if
/// no emoji starts there.
std::size_t emoji_length_at(std::u32string_view s, std::size_t pos) noexcept;

/// True if `s` contains "http://", "https://" or "www." ignoring ASCII case.
bool contains_url(std::string_view s) noexcept;

std::string normalize(std::string_view text, const NormalizationConfig& config);

std::vector<Token> tokenize(std::string_view text);

/// Number of tokens produced by tokenize(), without materializing them.
std::size_t count_tokens(std::string_view text);

std::vector<EmojiOccurrence> extract_emojis(std::string_view text);

/// Base emoji with modifiers and variation selectors removed.
std::u32string emoji_base(std::u32string_view grapheme);

/// "U+1F44D U+1F3FD" notation.
std::string codepoint_notation(std::u32string_view s);

}  // namespace dialect::text
