// Copyright 2026 The membooth Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "doctest.h"
#include "membooth/text.h"

using namespace membooth;

TEST_SUITE("text") {

TEST_CASE("whitespace split drops empty pieces") {
  CHECK(SplitWhitespace("  a\tb\n\nc  ") == std::vector<std::string>{"a", "b", "c"});
  CHECK(SplitWhitespace("").empty());
  CHECK(SplitWhitespace(" \t ").empty());
}

TEST_CASE("punctuation is stripped from the edges only") {
  CHECK(StripPunctuation("(DFKI),") == "DFKI");
  CHECK(StripPunctuation("e-Services.") == "e-Services");
  CHECK(StripPunctuation("\"quoted\"") == "quoted");
  CHECK(StripPunctuation("--").empty());
  CHECK(StripPunctuation("2026!") == "2026");
}

TEST_CASE("normalization lowercases") {
  CHECK(NormalizeToken("Aljoscha,") == "aljoscha");
  CHECK(NormalizeToken("MQM") == "mqm");
  CHECK(NormalizeToken("\xC3\x84rger") == "\xC3\xA4rger");  // Ärger
  CHECK(NormalizePhrase("  Ron   Weasly! ") == "ron weasly");
  CHECK(NormalizePhrase("... --").empty());
}

TEST_CASE("letters and code points") {
  CHECK(ContainsLetter("a1"));
  CHECK_FALSE(ContainsLetter("1984"));
  CHECK_FALSE(ContainsLetter(""));
  CHECK(ContainsLetter("\xC3\xA9"));
  CHECK(CodePointCount("caf\xC3\xA9") == 4);
  CHECK(CodePointCount("") == 0);
}

TEST_CASE("utf8 round trip") {
  std::string s;
  for (char32_t cp : {U'a', U'é', U'中', U'\U0001F600'}) AppendUtf8(cp, s);
  CHECK(s.size() == 1 + 2 + 3 + 4);
  CHECK(CodePointCount(s) == 4);
}

TEST_CASE("join") {
  CHECK(Join({"a", "b", "c"}, " ") == "a b c");
  CHECK(Join({}, ",").empty());
  CHECK(Join({"x"}, ",") == "x");
}

}
