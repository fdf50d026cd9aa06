#include <gtest/gtest.h>

#include "evpirank/rng.hpp"
#include "evpirank/text.hpp"

namespace evpirank {
namespace {

using Tokens = std::vector<std::string>;

TEST(Tokenize, SplitsOnPunctuationAndLowercases) {
  EXPECT_EQ(tokenize("Ubuntu 14.04 LTS!"), (Tokens{"ubuntu", "14", "04", "lts"}));
}

TEST(Tokenize, EmptyAndSeparatorOnlyInputs) {
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_TRUE(tokenize(" \t--?!\n").empty());
}

TEST(Tokenize, KeepsUtf8BytesInsideTokens) {
  EXPECT_EQ(tokenize("Caf\xC3\xA9 ok"), (Tokens{"caf\xC3\xA9", "ok"}));
}

TEST(Tokenize, IdempotentOnJoinedOutput) {
  static const char kAlphabet[] = "aB3 .,?!-_\t\nzZ9\xC3\xA9";
  Rng rng(99);
  for (int trial = 0; trial < 500; ++trial) {
    std::string s;
    const std::size_t len = rng.below(40);
    for (std::size_t k = 0; k < len; ++k) s.push_back(kAlphabet[rng.below(sizeof kAlphabet - 1)]);
    const Tokens once = tokenize(s);
    EXPECT_EQ(tokenize(join(once)), once) << s;
  }
}

TEST(WhitespaceTokens, PreservesCaseAndPunctuation) {
  EXPECT_EQ(whitespace_tokens("  Hello, World!\tx\n"), (Tokens{"Hello,", "World!", "x"}));
  EXPECT_TRUE(whitespace_tokens("   ").empty());
}

TEST(TextHelpers, JoinTrimLower) {
  EXPECT_EQ(join({"a", "b", "c"}, "-"), "a-b-c");
  EXPECT_EQ(join({}), "");
  EXPECT_EQ(trim("  x y \n"), "x y");
  EXPECT_EQ(trim("   "), "");
  EXPECT_EQ(to_lower_ascii("AbC\xC3\x89"), "abc\xC3\x89");
}

}  // namespace
}  // namespace evpirank
