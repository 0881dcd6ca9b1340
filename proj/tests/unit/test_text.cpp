#include <set>

#include "disco/common/random.hpp"
#include "disco/common/text.hpp"
#include "doctest.h"
#include "disco/errors.hpp"

using namespace disco;

TEST_CASE("tokenize detaches punctuation and keeps contractions") {
  const auto toks = text::tokenize("We'll be there... um, at 6:30—ok?");
  std::vector<std::string> got;
  for (const auto& t : toks) got.push_back(t.text);
  CHECK(got == std::vector<std::string>{"We'll", "be", "there", "...", "um", ",", "at", "6:30", "—", "ok", "?"});
  CHECK(toks[3].cls == text::TokenClass::ellipsis);
  CHECK(toks[8].cls == text::TokenClass::dash);
}

TEST_CASE("unicode ellipsis and typographic apostrophe") {
  const auto toks = text::tokenize("we’ll go… now");
  REQUIRE(toks.size() == 4);
  CHECK(toks[0].text == "we’ll");
  CHECK(toks[2].cls == text::TokenClass::ellipsis);
  CHECK(text::normalize("We’LL") == "we'll");
}

TEST_CASE("metric tokens lowercase and keep punctuation") {
  CHECK(text::metric_tokens("Turn LEFT, now.") == std::vector<std::string>{"turn", "left", ",", "now", "."});
  CHECK(text::metric_tokens("Turn LEFT", false) == std::vector<std::string>{"Turn", "LEFT"});
}

TEST_CASE("code point offsets") {
  const std::string s = "a—b";
  CHECK(text::codepoint_length(s) == 3);
  CHECK(text::codepoint_offset(s, 4) == 2);
  CHECK(text::byte_offset(s, 2) == 4);
  CHECK(text::byte_offset(s, 9) == s.size());
}

TEST_CASE("pieces concatenate back to the input") {
  for (const std::string s : {"  hello,  world ", "one", "", "a — b... c"}) {
    const auto p = text::split_pieces(s);
    std::string joined;
    for (const auto& piece : p.pieces) joined += piece;
    CHECK(joined == s);
  }
}

TEST_CASE("trim, blank and join") {
  CHECK(text::trim("  x y \n") == "x y");
  CHECK(text::is_blank(" \t\n"));
  CHECK_FALSE(text::is_blank(" a "));
  CHECK(text::join({"a", "b", "c"}, ", ") == "a, b, c");
}

TEST_CASE("derived seeds are stable and stream-sensitive") {
  CHECK(derive_seed(7, "navigation") == derive_seed(7, "navigation"));
  CHECK(derive_seed(7, "navigation") != derive_seed(7, "weather"));
  CHECK(derive_seed(7, std::uint64_t{1}) != derive_seed(8, std::uint64_t{1}));
  CHECK(fnv1a64("") == 14695981039346656037ull);
}

TEST_CASE("rng draws") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.uniform_index(10) == b.uniform_index(10));
  Rng r(1);
  const auto idx = r.sample_indices(50, 20);
  CHECK(idx.size() == 20);
  CHECK(std::set<std::size_t>(idx.begin(), idx.end()).size() == 20);
  for (const auto i : idx) CHECK(i < 50);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform01();
    CHECK((u >= 0.0 && u < 1.0));
    const auto v = r.uniform_int(-3, 3);
    CHECK((v >= -3 && v <= 3));
  }
  const std::vector<double> w = {0.0, 1.0, 0.0};
  CHECK(r.weighted_index(w) == 1);
}
