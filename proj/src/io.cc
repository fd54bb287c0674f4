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

#include "membooth/io.h"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "membooth/error.h"

namespace membooth {

const char* ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kEmptySurface: return "EmptySurface";
    case ErrorCode::kPhraseTooLong: return "PhraseTooLong";
    case ErrorCode::kOutOfRange: return "OutOfRange";
    case ErrorCode::kInvalidThreshold: return "InvalidThreshold";
    case ErrorCode::kOverlappingMatches: return "OverlappingMatches";
    case ErrorCode::kDanglingProvenance: return "DanglingProvenance";
    case ErrorCode::kEmptyReference: return "EmptyReference";
    case ErrorCode::kMissingCorpusInput: return "MissingCorpusInput";
    case ErrorCode::kParse: return "ParseError";
    case ErrorCode::kConfig: return "ConfigError";
    case ErrorCode::kProtocol: return "ProtocolError";
    case ErrorCode::kIo: return "IoError";
  }
  return "Error";
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFile(const std::string& path, std::string_view content) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

bool FileExists(const std::string& path) {
  std::error_code ec;
  return std::filesystem::is_regular_file(path, ec);
}

std::vector<std::string> SplitLines(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    out.emplace_back(line);
    start = end + 1;
  }
  return out;
}

std::vector<std::string> SplitTabs(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      return out;
    }
    out.emplace_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

int64_t ParseInt(std::string_view text, std::string_view what) {
  int64_t value = 0;
  const auto* first = text.data();
  const auto* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || text.empty())
    throw Error(ErrorCode::kParse, "bad integer for " + std::string(what) +
                                       ": '" + std::string(text) + "'");
  return value;
}

}  // namespace membooth
