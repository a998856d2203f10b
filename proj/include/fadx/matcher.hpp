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

#ifndef FADX_MATCHER_HPP_
#define FADX_MATCHER_HPP_

// Assigns mention embeddings to the most similar concept of a fixed lexicon,
// discarding mentions whose best cosine similarity falls below a threshold.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fadx::match {

inline constexpr double kDefaultEpsilon = 0.35;

/// dot(a, b) / (|a| |b|) clamped to [-1, 1]. ShapeError on unequal dims,
/// DomainError on a zero vector.
double cosine_sim(std::span<const double> a, std::span<const double> b);

struct LexiconEntry {
  std::string id;
  std::string name;
  std::vector<double> vector;
};

/// Immutable after construction: nonempty, uniform dim, nonzero vectors,
/// unique ids.
class EmbeddingLexicon {
 public:
  explicit EmbeddingLexicon(std::vector<LexiconEntry> entries);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return entries_.size(); }
  const std::vector<LexiconEntry>& entries() const { return entries_; }

 private:
  std::vector<LexiconEntry> entries_;
  std::size_t dim_ = 0;
};

struct MentionEmbedding {
  std::string text;
  std::vector<double> vector;
};

struct Assignment {
  std::string mention;
  std::optional<std::string> concept_id;  // nullopt: discarded
  std::size_t best_index = 0;             // lexicon position of the argmax
  double similarity = 0.0;                // best similarity, even when discarded
  bool tie = false;                       // another entry matched it exactly
};

/// Argmax-similarity concept if its similarity >= epsilon. Exact ties go to
/// the earliest lexicon entry and set `tie`.
Assignment assign_symptom(const MentionEmbedding& mention, const EmbeddingLexicon& lexicon,
                          double epsilon = kDefaultEpsilon);

/// Parses "id,name,v0,v1,..." rows (header required) or a JSON array of
/// {"id","name","vector"} objects. Format chosen by content.
EmbeddingLexicon parse_lexicon(std::string_view text);

/// CSV "text,v0,v1,..." with header, or JSON array of {"text","vector"}.
std::vector<MentionEmbedding> parse_mentions(std::string_view text);

}  // namespace fadx::match

#endif  // FADX_MATCHER_HPP_
