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

#include "dubalign/similarity.hpp"

#include <locale.h>
#include <wctype.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <tuple>

#include "dubalign/parallel.hpp"
#include "dubalign/segment_io.hpp"

namespace dubalign {
namespace {

locale_t Utf8Locale() {
  static const locale_t loc = [] {
    locale_t l = newlocale(LC_CTYPE_MASK, "C.UTF-8", static_cast<locale_t>(nullptr));
    if (l == static_cast<locale_t>(nullptr)) {
      l = newlocale(LC_CTYPE_MASK, "C.utf8", static_cast<locale_t>(nullptr));
    }
    return l;
  }();
  return loc;
}

// Decodes one code point; returns 0xFFFFFFFF and advances one byte on
// malformed input.
char32_t DecodeUtf8(const std::string& s, std::size_t& i) {
  const auto b0 = static_cast<unsigned char>(s[i]);
  int len = b0 < 0x80 ? 1 : (b0 >> 5) == 0x6 ? 2 : (b0 >> 4) == 0xe ? 3 : (b0 >> 3) == 0x1e ? 4 : 0;
  if (len == 0 || i + len > s.size()) {
    ++i;
    return 0xFFFFFFFF;
  }
  char32_t cp = len == 1 ? b0 : len == 2 ? (b0 & 0x1f) : len == 3 ? (b0 & 0x0f) : (b0 & 0x07);
  for (int k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b >> 6) != 0x2) {
      ++i;
      return 0xFFFFFFFF;
    }
    cp = (cp << 6) | (b & 0x3f);
  }
  i += len;
  return cp;
}

void EncodeUtf8(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xc0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3f));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xe0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3f));
    out += static_cast<char>(0x80 | (cp & 0x3f));
  } else {
    out += static_cast<char>(0xf0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3f));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3f));
    out += static_cast<char>(0x80 | (cp & 0x3f));
  }
}

struct Scored {
  double score = 0.0;
  bool covered = false;
};

double Norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

Scored ScoreVectors(const std::optional<std::vector<double>>& a,
                    const std::optional<std::vector<double>>& b) {
  if (!a || !b || Norm(*a) == 0.0 || Norm(*b) == 0.0) return {};
  return {std::clamp(Cosine(*a, *b), 0.0, 1.0), true};
}

const std::string& LeftText(const SpeechSegment& s) {
  if (!s.translation) Fail(ErrorKind::kValidation, "segment " + s.id + " has no translation");
  return *s.translation;
}

const std::string& RightText(const SpeechSegment& s) {
  if (!s.transcript) Fail(ErrorKind::kValidation, "segment " + s.id + " has no transcript");
  return *s.transcript;
}

}  // namespace

EmbeddingTable::EmbeddingTable(std::size_t dim,
                               std::unordered_map<std::string, std::vector<float>> vectors,
                               std::vector<std::string> warnings)
    : dim_(dim), vectors_(std::move(vectors)), warnings_(std::move(warnings)) {
  if (dim_ == 0) Fail(ErrorKind::kValidation, "embedding dimension must be positive");
  if (vectors_.empty()) Fail(ErrorKind::kValidation, "embedding vocabulary is empty");
  for (const auto& [token, v] : vectors_) {
    if (v.size() != dim_) Fail(ErrorKind::kValidation, "embedding for '" + token + "' has wrong dimension");
  }
}

const std::vector<float>* EmbeddingTable::Find(const std::string& token) const {
  auto it = vectors_.find(token);
  return it == vectors_.end() ? nullptr : &it->second;
}

EmbeddingTable ParseEmbeddings(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) Fail(ErrorKind::kValidation, origin + ": missing header");
  std::size_t count = 0, dim = 0;
  {
    std::istringstream header(line);
    std::string extra;
    if (!(header >> count >> dim) || (header >> extra) || dim == 0) {
      Fail(ErrorKind::kValidation, origin + ":1: malformed header, expected '<count> <dim>'");
    }
  }
  if (count == 0) Fail(ErrorKind::kValidation, origin + ": embedding vocabulary is empty");
  std::unordered_map<std::string, std::vector<float>> vectors;
  std::vector<std::string> warnings;
  std::size_t rows = 0;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(line_no) + ": ";
    const auto sp = line.find(' ');
    if (sp == std::string::npos || sp == 0) Fail(ErrorKind::kValidation, where + "expected '<token> <floats>'");
    std::string token = line.substr(0, sp);
    std::vector<float> v;
    v.reserve(dim);
    const char* p = line.data() + sp;
    const char* end = line.data() + line.size();
    while (p < end) {
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      float x = 0;
      auto [q, ec] = std::from_chars(p, end, x);
      if (ec != std::errc()) Fail(ErrorKind::kValidation, where + "unparsable float");
      v.push_back(x);
      p = q;
    }
    if (v.size() != dim) {
      Fail(ErrorKind::kValidation, where + "expected " + std::to_string(dim) + " floats, got " +
                                       std::to_string(v.size()));
    }
    if (vectors.count(token) != 0) {
      warnings.push_back(where + "duplicate token '" + token + "', keeping the last vector");
    }
    vectors[std::move(token)] = std::move(v);
    ++rows;
  }
  if (rows != count) {
    Fail(ErrorKind::kValidation, origin + ": header announces " + std::to_string(count) +
                                     " vectors, file has " + std::to_string(rows));
  }
  return EmbeddingTable(dim, std::move(vectors), std::move(warnings));
}

EmbeddingTable LoadEmbeddings(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    Fail(ErrorKind::kMissingArtifact, "embedding file not found: " + path.string());
  }
  return ParseEmbeddings(ReadFile(path), path.string());
}

std::vector<std::string> Tokenize(const std::string& text) {
  const locale_t loc = Utf8Locale();
  std::vector<std::string> tokens;
  std::string cur;
  for (std::size_t i = 0; i < text.size();) {
    const char32_t cp = DecodeUtf8(text, i);
    const bool letter = cp != 0xFFFFFFFF && iswalpha_l(static_cast<wint_t>(cp), loc);
    if (letter) {
      EncodeUtf8(static_cast<char32_t>(towlower_l(static_cast<wint_t>(cp), loc)), cur);
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

std::optional<std::vector<double>> SentenceVector(const std::string& text,
                                                  const EmbeddingTable& table) {
  std::vector<double> sum(table.dim(), 0.0);
  std::size_t hits = 0;
  for (const auto& tok : Tokenize(text)) {
    const auto* v = table.Find(tok);
    if (v == nullptr) continue;
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += (*v)[k];
    ++hits;
  }
  if (hits == 0) return std::nullopt;
  for (double& x : sum) x /= static_cast<double>(hits);
  return sum;
}

double Cosine(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) {
    Fail(ErrorKind::kValidation, "cosine of vectors with dimensions " + std::to_string(u.size()) +
                                     " and " + std::to_string(v.size()));
  }
  const double nu = Norm(u);
  const double nv = Norm(v);
  if (nu == 0.0 || nv == 0.0) Fail(ErrorKind::kValidation, "cosine of a zero vector");
  double dot = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) dot += u[k] * v[k];
  return std::clamp(dot / (nu * nv), -1.0, 1.0);
}

double TextSimilarity(const std::string& a, const std::string& b, const EmbeddingTable& table) {
  return ScoreVectors(SentenceVector(a, table), SentenceVector(b, table)).score;
}

SimilarityMatrix::SimilarityMatrix(std::vector<std::string> row_ids,
                                   std::vector<std::string> col_ids,
                                   std::vector<MatrixEntry> entries)
    : row_ids_(std::move(row_ids)), col_ids_(std::move(col_ids)), entries_(std::move(entries)) {
  std::sort(entries_.begin(), entries_.end(), [](const MatrixEntry& a, const MatrixEntry& b) {
    return std::tie(a.row, a.col) < std::tie(b.row, b.col);
  });
  row_offset_.assign(row_ids_.size() + 1, 0);
  for (const auto& e : entries_) {
    if (e.row >= row_ids_.size() || e.col >= col_ids_.size()) {
      Fail(ErrorKind::kValidation, "similarity entry refers to an unknown segment");
    }
    if (!(e.score >= 0.0 && e.score <= 1.0)) {
      Fail(ErrorKind::kValidation, "similarity score outside [0, 1]");
    }
    ++row_offset_[e.row + 1];
  }
  for (std::size_t r = 0; r < row_ids_.size(); ++r) row_offset_[r + 1] += row_offset_[r];
}

std::span<const MatrixEntry> SimilarityMatrix::Row(std::size_t row) const {
  if (row >= row_ids_.size()) return {};
  return std::span<const MatrixEntry>(entries_).subspan(row_offset_[row],
                                                         row_offset_[row + 1] - row_offset_[row]);
}

std::optional<MatrixEntry> SimilarityMatrix::Find(std::size_t row, std::size_t col) const {
  const auto r = Row(row);
  auto it = std::lower_bound(r.begin(), r.end(), col,
                             [](const MatrixEntry& e, std::size_t c) { return e.col < c; });
  if (it == r.end() || it->col != col) return std::nullopt;
  return *it;
}

Millis CandidateSlackMs(const std::vector<SpeechSegment>& left,
                        const std::vector<SpeechSegment>& right, const PipelineConfig& cfg) {
  Millis slack = 0;
  const auto k = static_cast<std::size_t>(cfg.max_window_segments);
  for (const auto* side : {&left, &right}) {
    for (std::size_t i = 0; i < side->size(); ++i) {
      const std::size_t last = std::min(side->size(), i + k) - 1;
      slack = std::max(slack, (*side)[last].span.end_ms() - (*side)[i].span.start_ms());
    }
  }
  return slack;
}

SimilarityMatrix BuildMatrix(const std::vector<SpeechSegment>& left,
                             const std::vector<SpeechSegment>& right, const EmbeddingTable& table,
                             const PipelineConfig& cfg, int jobs) {
  CheckChronological(left);
  CheckChronological(right);
  std::vector<std::optional<std::vector<double>>> lvec(left.size()), rvec(right.size());
  ParallelFor(left.size(), jobs, [&](std::size_t i) { lvec[i] = SentenceVector(LeftText(left[i]), table); });
  ParallelFor(right.size(), jobs, [&](std::size_t j) { rvec[j] = SentenceVector(RightText(right[j]), table); });

  const Millis reach = cfg.max_start_diff_ms() + CandidateSlackMs(left, right, cfg);
  std::vector<std::vector<MatrixEntry>> rows(left.size());
  ParallelFor(left.size(), jobs, [&](std::size_t i) {
    const Millis lo = left[i].span.start_ms() - reach;
    const Millis hi = left[i].span.start_ms() + reach;
    auto first = std::lower_bound(right.begin(), right.end(), lo,
                                  [](const SpeechSegment& s, Millis t) { return s.span.start_ms() < t; });
    for (auto it = first; it != right.end() && it->span.start_ms() <= hi; ++it) {
      const auto j = static_cast<std::size_t>(it - right.begin());
      const Scored s = ScoreVectors(lvec[i], rvec[j]);
      rows[i].push_back({i, j, s.score, s.covered});
    }
  });

  std::vector<std::string> row_ids, col_ids;
  for (const auto& s : left) row_ids.push_back(s.id);
  for (const auto& s : right) col_ids.push_back(s.id);
  std::vector<MatrixEntry> entries;
  for (auto& r : rows) entries.insert(entries.end(), r.begin(), r.end());
  return SimilarityMatrix(std::move(row_ids), std::move(col_ids), std::move(entries));
}

void WriteMatrixTsv(const std::filesystem::path& path, const SimilarityMatrix& matrix) {
  std::string out;
  for (const auto& e : matrix.entries()) {
    out += matrix.row_ids()[e.row] + '\t' + matrix.col_ids()[e.col] + '\t' + FormatDouble(e.score) +
           '\t' + (e.covered ? "1" : "0") + '\n';
  }
  WriteFileAtomic(path, out);
}

SimilarityMatrix ReadMatrixTsv(const std::filesystem::path& path,
                               const std::vector<SpeechSegment>& left,
                               const std::vector<SpeechSegment>& right) {
  std::unordered_map<std::string, std::size_t> rindex, cindex;
  std::vector<std::string> row_ids, col_ids;
  for (std::size_t i = 0; i < left.size(); ++i) {
    rindex[left[i].id] = i;
    row_ids.push_back(left[i].id);
  }
  for (std::size_t j = 0; j < right.size(); ++j) {
    cindex[right[j].id] = j;
    col_ids.push_back(right[j].id);
  }
  std::ifstream in(path);
  if (!in) Fail(ErrorKind::kMissingArtifact, "similarity matrix not found: " + path.string());
  std::vector<MatrixEntry> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string rid, cid, score, covered;
    const std::string where = path.string() + ":" + std::to_string(line_no) + ": ";
    if (!std::getline(row, rid, '\t') || !std::getline(row, cid, '\t') ||
        !std::getline(row, score, '\t') || !std::getline(row, covered)) {
      Fail(ErrorKind::kValidation, where + "malformed row");
    }
    auto ri = rindex.find(rid);
    auto ci = cindex.find(cid);
    if (ri == rindex.end() || ci == cindex.end()) Fail(ErrorKind::kValidation, where + "unknown segment id");
    double value = 0;
    auto [p, ec] = std::from_chars(score.data(), score.data() + score.size(), value);
    if (ec != std::errc() || p != score.data() + score.size()) {
      Fail(ErrorKind::kValidation, where + "bad score");
    }
    entries.push_back({ri->second, ci->second, value, covered == "1"});
  }
  return SimilarityMatrix(std::move(row_ids), std::move(col_ids), std::move(entries));
}

}  // namespace dubalign
