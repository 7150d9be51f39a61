#include "seedgrow/text.hpp"

#include <cstdint>

namespace seedgrow {
namespace {

struct Decoded {
    char32_t cp;
    std::size_t len; // 0 on malformed input
};

Decoded decode_one(std::string_view s, std::size_t i) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) return {b0, 1};
    std::size_t len = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        return {0, 0};
    }
    if (i + len > s.size()) return {0, 0};
    for (std::size_t k = 1; k < len; ++k) {
        const auto b = static_cast<unsigned char>(s[i + k]);
        if ((b & 0xC0) != 0x80) return {0, 0};
        cp = (cp << 6) | (b & 0x3F);
    }
    // overlong forms, surrogates, out of range
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && cp < 0x10000) ||
        (cp >= 0xD800 && cp <= 0xDFFF) || cp > 0x10FFFF) {
        return {0, 0};
    }
    return {cp, len};
}

bool is_unicode_space(char32_t cp) {
    switch (cp) {
    case 0x85:
    case 0xA0:
    case 0x1680:
    case 0x2028:
    case 0x2029:
    case 0x202F:
    case 0x205F:
    case 0x3000:
        return true;
    default:
        return cp >= 0x2000 && cp <= 0x200A;
    }
}

bool is_control(char32_t cp) { return cp < 0x20 || (cp >= 0x7F && cp <= 0x9F); }

bool is_invisible(char32_t cp) {
    return (cp >= 0x200B && cp <= 0x200D) || cp == 0x2060 || cp == 0xFEFF || cp == 0xFFFD;
}

bool is_ascii_alnum(char32_t cp) {
    return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
}

bool is_unicode_punct(char32_t cp) {
    if (cp >= 0xA1 && cp <= 0xBF) {
        // keep ordinal indicators, micro sign and superscript/fraction digits
        return cp != 0xAA && cp != 0xB5 && cp != 0xBA && cp != 0xB2 && cp != 0xB3 && cp != 0xB9 &&
               !(cp >= 0xBC && cp <= 0xBE);
    }
    return cp == 0xD7 || cp == 0xF7 || (cp >= 0x2010 && cp <= 0x2027) ||
           (cp >= 0x2030 && cp <= 0x205E) || (cp >= 0x3001 && cp <= 0x3003) ||
           (cp >= 0x3008 && cp <= 0x3011) || (cp >= 0xFF01 && cp <= 0xFF0F) ||
           (cp >= 0xFF1A && cp <= 0xFF20);
}

bool is_separator(char32_t cp) {
    if (cp < 0x80) return !is_ascii_alnum(cp);
    return is_control(cp) || is_unicode_space(cp) || is_invisible(cp) || is_unicode_punct(cp);
}

} // namespace

bool is_valid_utf8(std::string_view text) {
    for (std::size_t i = 0; i < text.size();) {
        const auto d = decode_one(text, i);
        if (d.len == 0) return false;
        i += d.len;
    }
    return true;
}

std::string normalize_text(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (std::size_t i = 0; i < text.size();) {
        auto d = decode_one(text, i);
        if (d.len == 0) d = {0xFFFD, 1}; // drop stray bytes
        const auto chunk = text.substr(i, d.len);
        i += d.len;
        if (is_invisible(d.cp)) continue;
        if (d.cp == ' ' || is_control(d.cp) || is_unicode_space(d.cp)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.append(chunk);
    }
    return out;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&] {
        if (!current.empty()) tokens.push_back(std::move(current));
        current.clear();
    };
    for (std::size_t i = 0; i < text.size();) {
        auto d = decode_one(text, i);
        if (d.len == 0) {
            ++i;
            flush();
            continue;
        }
        const auto chunk = text.substr(i, d.len);
        i += d.len;
        if (is_separator(d.cp)) {
            flush();
        } else if (d.cp < 0x80) {
            const auto c = static_cast<char>(d.cp);
            current.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c);
        } else {
            current.append(chunk);
        }
    }
    flush();
    return tokens;
}

} // namespace seedgrow
