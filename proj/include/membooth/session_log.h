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

#pragma once

#include <string>

#include "json.hpp"
#include "membooth/eval.h"
#include "membooth/stream_worker.h"

namespace membooth {

nlohmann::json ToJson(const DecodedToken& token);
nlohmann::json ToJson(const EmittedSegment& segment);
nlohmann::json ToJson(const MemoryMatch& match);
nlohmann::json ToJson(const DecodeRecord& record);
nlohmann::json ToJson(const AppliedMutation& applied);
nlohmann::json ToJson(const MemoryMutation& mutation);
nlohmann::json ToJson(const MemorySnapshot& snapshot);
nlohmann::json ToJson(const NewWordReport& report);

DecodedToken DecodedTokenFromJson(const nlohmann::json& j);
MemoryMutation MutationFromJson(const nlohmann::json& j);

/// One JSON object per line, in emission order.
std::string SegmentLog(const SessionResult& result);
std::string DecodeLog(const SessionResult& result);
std::string MutationLog(const SessionResult& result);

}  // namespace membooth
