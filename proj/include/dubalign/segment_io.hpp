// Copyright 2026 The dubalign Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dubalign/core.hpp"

namespace dubalign {

// One JSON object per line:
// {"id","track","start_ms","end_ms","label","language","transcript","translation"}
// where transcript/translation are null when absent.
nlohmann::json SegmentToJson(const SpeechSegment& s);
SpeechSegment SegmentFromJson(const nlohmann::json& j);

void WriteSegments(const std::filesystem::path& path, const std::vector<SpeechSegment>& segments);
std::vector<SpeechSegment> ReadSegments(const std::filesystem::path& path);

// Writes to a sibling temp file and renames, so readers never see partial output.
void WriteFileAtomic(const std::filesystem::path& path, const std::string& contents);
std::string ReadFile(const std::filesystem::path& path);

// Opens an append-only log, creating parent directories. A torn last line
// left by a crash is terminated first so the next record starts clean.
std::ofstream OpenAppendLog(const std::filesystem::path& path);

}  // namespace dubalign
