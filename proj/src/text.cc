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

#include "membooth/text.h"

#include <cstdint>

namespace membooth {
namespace {

struct CodePoint {
  char32_t value;
  std::size_t length;
};

CodePoint DecodeAt(std::string_view s, std::size_t i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  auto cont = [&](std::size_t k) -> int {
    if (i + k >= s.size()) return -1;
    const auto b = static_cast<unsigned char>(s[i + k]);
    return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
  };
  if (b0 < 0x80) return {b0, 1};
  if ((b0 & 0xE0) == 0xC0) {
    const int c1 = cont(1);
    if (c1 >= 0) return {static_cast<char32_t>(((b0 & 0x1F) << 6) | c1), 2};
  } else if ((b0 & 0xF0) == 0xE0) {
    const int c1 = cont(1), c2 = cont(2);
    if (c1 >= 0 && c2 >= 0)
      return {static_cast<char32_t>(((b0 & 0x0F) << 12) | (c1 << 6) | c2), 3};
  } else if ((b0 & 0xF8) == 0xF0) {
    const int c1 = cont(1), c2 = cont(2), c3 = cont(3);
    if (c1 >= 0 && c2 >= 0 && c3 >= 0)
      return {static_cast<char32_t>(((b0 & 0x07) << 18) | (c1 << 12) |
                                    (c2 << 6) | c3),
              4};
  }
  // Invalid sequence: treat the byte as an opaque letter-like unit.
  return {0xFFFD, 1};
}

void Encode(char32_t cp, std::string& out) {
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

bool IsAsciiDigit(char32_t cp) { return cp >= U'0' && cp <= U'9'; }

bool IsAsciiLetter(char32_t cp) {
  return (cp >= U'a' && cp <= U'z') || (cp >= U'A' && cp <= U'Z');
}

bool IsLetter(char32_t cp) {
  if (cp < 0x80) return IsAsciiLetter(cp);
  if (cp <= 0xBF) return false;                 // Latin-1 symbols
  if (cp == 0xD7 || cp == 0xF7) return false;   // multiplication/division
  if (cp >= 0x2000 && cp <= 0x2BFF) return false;  // punctuation, symbols
  if (cp >= 0x3000 && cp <= 0x303F) return false;  // CJK punctuation
  if (cp >= 0xFE30 && cp <= 0xFE4F) return false;
  if (cp >= 0xFF00 && cp <= 0xFF0F) return false;
  return true;
}

bool IsWordChar(char32_t cp) { return IsAsciiDigit(cp) || IsLetter(cp); }

char32_t ToLower(char32_t cp) {
  if (cp >= U'A' && cp <= U'Z') return cp + 0x20;
  if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
  if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 0x20;
  if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;
  if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
  return cp;
}

bool IsSpace(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

}  // namespace

std::vector<std::string> SplitWhitespace(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && IsSpace(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !IsSpace(text[j])) ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string StripPunctuation(std::string_view raw) {
  std::size_t begin = raw.size();
  std::size_t end = 0;
  for (std::size_t i = 0; i < raw.size();) {
    const CodePoint cp = DecodeAt(raw, i);
    if (IsWordChar(cp.value)) {
      if (begin == raw.size()) begin = i;
      end = i + cp.length;
    }
    i += cp.length;
  }
  if (begin >= end) return {};
  return std::string(raw.substr(begin, end - begin));
}

std::string Lowercase(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) {
    const CodePoint cp = DecodeAt(text, i);
    if (cp.value == 0xFFFD && cp.length == 1) {
      out.push_back(text[i]);
    } else {
      Encode(ToLower(cp.value), out);
    }
    i += cp.length;
  }
  return out;
}

std::string NormalizeToken(std::string_view raw) {
  return Lowercase(StripPunctuation(raw));
}

std::string NormalizePhrase(std::string_view text) {
  std::string out;
  for (const auto& word : SplitWhitespace(text)) {
    std::string norm = NormalizeToken(word);
    if (norm.empty()) continue;
    if (!out.empty()) out.push_back(' ');
    out += norm;
  }
  return out;
}

bool ContainsLetter(std::string_view text) {
  for (std::size_t i = 0; i < text.size();) {
    const CodePoint cp = DecodeAt(text, i);
    if (IsLetter(cp.value)) return true;
    i += cp.length;
  }
  return false;
}

void AppendUtf8(char32_t cp, std::string& out) { Encode(cp, out); }

std::size_t CodePointCount(std::string_view text) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < text.size(); ++n) i += DecodeAt(text, i).length;
  return n;
}

std::string Join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace membooth
