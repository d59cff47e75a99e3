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
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "dubalign/config.hpp"
#include "dubalign/core.hpp"

namespace dubalign {

// Word vectors in the word2vec text format: a `<count> <dim>` header, then
// `<token> <dim floats>` per line.
class EmbeddingTable {
 public:
  EmbeddingTable(std::size_t dim, std::unordered_map<std::string, std::vector<float>> vectors,
                 std::vector<std::string> warnings = {});

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return vectors_.size(); }
  const std::vector<float>* Find(const std::string& token) const;
  const std::vector<std::string>& warnings() const noexcept { return warnings_; }

 private:
  std::size_t dim_;
  std::unordered_map<std::string, std::vector<float>> vectors_;
  std::vector<std::string> warnings_;
};

// Duplicate tokens keep the last vector and add a warning.
EmbeddingTable LoadEmbeddings(const std::filesystem::path& path);
EmbeddingTable ParseEmbeddings(const std::string& text, const std::string& origin);

// Lowercased maximal runs of Unicode letters; everything else separates.
std::vector<std::string> Tokenize(const std::string& text);

// Mean of the vectors of in-vocabulary tokens; nullopt when no token is
// covered.
std::optional<std::vector<double>> SentenceVector(const std::string& text,
                                                  const EmbeddingTable& table);

double Cosine(std::span<const double> u, std::span<const double> v);

// max(0, cosine) of the two texts' sentence vectors; 0 without coverage.
double TextSimilarity(const std::string& a, const std::string& b, const EmbeddingTable& table);

struct MatrixEntry {
  std::size_t row = 0;  // index into the translated (left) segments
  std::size_t col = 0;  // index into the transcribed (right) segments
  double score = 0.0;
  bool covered = true;  // false when either side had no in-vocabulary token
  bool operator==(const MatrixEntry&) const = default;
};

// Sparse scores between translated left segments and transcribed right
// segments. Only pairs whose start times are close enough for some matching
// rule to accept them are stored.
class SimilarityMatrix {
 public:
  SimilarityMatrix() = default;
  SimilarityMatrix(std::vector<std::string> row_ids, std::vector<std::string> col_ids,
                   std::vector<MatrixEntry> entries);

  const std::vector<std::string>& row_ids() const { return row_ids_; }
  const std::vector<std::string>& col_ids() const { return col_ids_; }
  const std::vector<MatrixEntry>& entries() const { return entries_; }
  std::optional<MatrixEntry> Find(std::size_t row, std::size_t col) const;
  // Entries of one row, sorted by column.
  std::span<const MatrixEntry> Row(std::size_t row) const;

  bool operator==(const SimilarityMatrix&) const = default;

 private:
  std::vector<std::string> row_ids_;
  std::vector<std::string> col_ids_;
  std::vector<MatrixEntry> entries_;     // sorted by (row, col)
  std::vector<std::size_t> row_offset_;  // row r occupies [row_offset_[r], row_offset_[r+1])
};

// Extra start-time allowance beyond max_start_diff: the longest stretch
// covered by max_window_segments consecutive segments of either side.
Millis CandidateSlackMs(const std::vector<SpeechSegment>& left,
                        const std::vector<SpeechSegment>& right, const PipelineConfig& cfg);

// Scores every translated left segment against the transcribed right
// segments that start within max_start_diff + slack of it.
SimilarityMatrix BuildMatrix(const std::vector<SpeechSegment>& left,
                             const std::vector<SpeechSegment>& right, const EmbeddingTable& table,
                             const PipelineConfig& cfg, int jobs = 1);

// `row_id\tcol_id\tscore\tcovered` per stored entry.
void WriteMatrixTsv(const std::filesystem::path& path, const SimilarityMatrix& matrix);
SimilarityMatrix ReadMatrixTsv(const std::filesystem::path& path,
                               const std::vector<SpeechSegment>& left,
                               const std::vector<SpeechSegment>& right);

}  // namespace dubalign
