#include <gtest/gtest.h>

#include "seedgrow/text.hpp"

using namespace seedgrow;
using Tokens = std::vector<std::string>;

TEST(Tokenize, LowercasesAndDropsPunctuation) {
    EXPECT_EQ(tokenize("Graphics Tablet!"), (Tokens{"graphics", "tablet"}));
}

TEST(Tokenize, EmptyText) { EXPECT_TRUE(tokenize("").empty()); }

TEST(Tokenize, SplitsHyphenatedWords) {
    EXPECT_EQ(tokenize("wi-fi router"), (Tokens{"wi", "fi", "router"}));
}

TEST(Tokenize, KeepsDigitsAndNonAsciiLetters) {
    EXPECT_EQ(tokenize("Model X200 café"), (Tokens{"model", "x200", "café"}));
}

TEST(Tokenize, SplitsOnUnicodeSpaceAndPunctuation) {
    // U+00A0 no-break space, U+2014 em dash, U+3001 ideographic comma
    EXPECT_EQ(tokenize("pen\xC2\xA0nib\xE2\x80\x94ink\xE3\x80\x81paper"),
              (Tokens{"pen", "nib", "ink", "paper"}));
}

TEST(Tokenize, IsDeterministic) {
    const std::string s = "Same input, same   output. ¿Sí?";
    EXPECT_EQ(tokenize(s), tokenize(s));
}

TEST(Normalize, CollapsesWhitespace) {
    EXPECT_EQ(normalize_text("My tablet  pen\t broke"), "My tablet pen broke");
    EXPECT_EQ(normalize_text("\n  line one\r\nline two \t"), "line one line two");
}

TEST(Normalize, DropsInvisibleCharacters) {
    // zero-width space and BOM vanish without splitting the word
    EXPECT_EQ(normalize_text("ta\xE2\x80\x8B" "blet\xEF\xBB\xBF"), "tablet");
}

TEST(Normalize, KeepsPunctuation) { EXPECT_EQ(normalize_text("Hi, there!"), "Hi, there!"); }

TEST(Normalize, AllWhitespaceBecomesEmpty) { EXPECT_EQ(normalize_text(" \t\n "), ""); }

TEST(Utf8, Validation) {
    EXPECT_TRUE(is_valid_utf8("plain"));
    EXPECT_TRUE(is_valid_utf8("caf\xC3\xA9"));
    EXPECT_FALSE(is_valid_utf8("\xC3"));
    EXPECT_FALSE(is_valid_utf8("\xFF\xFE"));
}
