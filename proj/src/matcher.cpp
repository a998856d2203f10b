// Copyright 2026 The fadx Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "fadx/matcher.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "fadx/csv.hpp"
#include "fadx/error.hpp"
#include "json.hpp"

namespace fadx::match {
namespace {

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

bool looks_like_json(std::string_view text) {
  const auto pos = text.find_first_not_of(" \t\r\n");
  return pos != std::string_view::npos && (text[pos] == '[' || text[pos] == '{');
}

std::vector<double> parse_vector(const std::vector<std::string>& fields, std::size_t first,
                                 std::size_t line) {
  std::vector<double> v;
  for (std::size_t k = first; k < fields.size(); ++k) v.push_back(csv::parse_double(fields[k], line));
  return v;
}

}  // namespace

double cosine_sim(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ShapeError(fmt::format("cosine similarity of vectors with dims {} and {}", a.size(), b.size()));
  }
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) throw DomainError("cosine similarity of a zero vector");
  double dot = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  return std::clamp(dot / (na * nb), -1.0, 1.0);
}

EmbeddingLexicon::EmbeddingLexicon(std::vector<LexiconEntry> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw ConfigError("lexicon is empty");
  dim_ = entries_.front().vector.size();
  if (dim_ == 0) throw ShapeError("lexicon vectors are empty");
  std::set<std::string> ids;
  for (const auto& e : entries_) {
    if (e.vector.size() != dim_) throw ShapeError(fmt::format("lexicon entry '{}' has wrong dim", e.id));
    if (norm(e.vector) == 0.0) throw DomainError(fmt::format("lexicon entry '{}' is a zero vector", e.id));
    if (!ids.insert(e.id).second) throw ConfigError(fmt::format("duplicate lexicon id '{}'", e.id));
  }
}

Assignment assign_symptom(const MentionEmbedding& mention, const EmbeddingLexicon& lexicon,
                          double epsilon) {
  if (!(epsilon >= -1.0 && epsilon <= 1.0)) {
    throw ConfigError(fmt::format("epsilon must lie in [-1, 1], got {}", epsilon));
  }
  if (mention.vector.size() != lexicon.dim()) {
    throw ShapeError(fmt::format("mention '{}' has dim {}, lexicon dim is {}", mention.text,
                                 mention.vector.size(), lexicon.dim()));
  }
  Assignment out;
  out.mention = mention.text;
  out.similarity = -2.0;
  const auto& entries = lexicon.entries();
  for (std::size_t k = 0; k < entries.size(); ++k) {
    const double sim = cosine_sim(mention.vector, entries[k].vector);
    if (sim > out.similarity) {
      out.similarity = sim;
      out.best_index = k;
      out.tie = false;
    } else if (sim == out.similarity) {
      out.tie = true;
    }
  }
  if (out.similarity >= epsilon) out.concept_id = entries[out.best_index].id;
  return out;
}

EmbeddingLexicon parse_lexicon(std::string_view text) {
  std::vector<LexiconEntry> entries;
  if (looks_like_json(text)) {
    try {
      const auto doc = nlohmann::json::parse(text);
      const auto& list = doc.is_object() ? doc.at("entries") : doc;
      for (const auto& e : list) {
        entries.push_back({e.at("id").get<std::string>(), e.value("name", e.at("id").get<std::string>()),
                           e.at("vector").get<std::vector<double>>()});
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(fmt::format("lexicon JSON: {}", e.what()));
    }
    return EmbeddingLexicon(std::move(entries));
  }
  const auto table = csv::parse(text);
  if (table.header.size() < 3 || table.header[0] != "id" || table.header[1] != "name") {
    throw ParseError("lexicon CSV header must start with id,name followed by vector columns", 1);
  }
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    entries.push_back({row[0], row[1], parse_vector(row, 2, table.line_numbers[r])});
  }
  return EmbeddingLexicon(std::move(entries));
}

std::vector<MentionEmbedding> parse_mentions(std::string_view text) {
  std::vector<MentionEmbedding> mentions;
  if (looks_like_json(text)) {
    try {
      const auto doc = nlohmann::json::parse(text);
      const auto& list = doc.is_object() ? doc.at("mentions") : doc;
      for (const auto& m : list) {
        mentions.push_back({m.at("text").get<std::string>(), m.at("vector").get<std::vector<double>>()});
      }
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(fmt::format("mentions JSON: {}", e.what()));
    }
    return mentions;
  }
  const auto table = csv::parse(text);
  if (table.header.size() < 2 || table.header[0] != "text") {
    throw ParseError("mentions CSV header must start with text followed by vector columns", 1);
  }
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    mentions.push_back({table.rows[r][0], parse_vector(table.rows[r], 1, table.line_numbers[r])});
  }
  return mentions;
}

}  // namespace fadx::match
