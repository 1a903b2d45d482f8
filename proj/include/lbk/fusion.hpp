#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lbk/provider.hpp"
#include "lbk/tensor.hpp"

namespace lbk {

enum class Modality { kImage, kAudio, kMusic, kWeather, kText };

std::string_view to_string(Modality m) noexcept;
/// Lowercase modality name. Throws InvalidSpec for anything else.
Modality parse_modality(std::string_view name);

/// Number of whitespace-separated tokens.
std::size_t count_words(std::string_view text) noexcept;

struct ModalityDescription {
  Modality modality;
  std::string text;
  std::size_t word_count;

  ModalityDescription(Modality m, std::string t)
      : modality(m), text(std::move(t)), word_count(count_words(text)) {}
};

struct Query {
  std::string text;
  LatentVector embedding;
};

/// Predefined music queries with their text embeddings. Non-empty, one
/// dimension throughout, no zero embeddings.
class QueryCatalog {
 public:
  explicit QueryCatalog(std::vector<Query> queries);

  const std::vector<Query>& queries() const noexcept { return queries_; }
  std::size_t size() const noexcept { return queries_.size(); }
  std::size_t dim() const noexcept { return queries_.front().embedding.dim(); }

 private:
  std::vector<Query> queries_;
};

struct QueryMatch {
  std::size_t index;
  std::string text;
  double score;
};

/// Catalog entry with the highest cosine similarity to the music embedding;
/// ties go to the lowest index.
QueryMatch best_music_query(const LatentVector& music_embedding,
                            const QueryCatalog& catalog);

struct FusionConfig {
  std::size_t verbosity_threshold = 10;  // k, in words
  ParaphraseParams paraphrase;

  /// Throws InvalidSpec unless k >= 1, l_min <= l_max and num_beams >= 1.
  void validate() const;
};

/// Descriptions longer than k words are sent for paraphrasing.
bool needs_paraphrasing(const ModalityDescription& d, const FusionConfig& cfg);

/// Non-empty texts in order, joined with ", ".
std::string concatenate_descriptions(
    const std::vector<ModalityDescription>& ds);

struct WeatherRecord {
  std::string condition;
  double temperature_c;
  double wind_mps;
};

/// "<condition>, <t> degrees, wind <w> m/s" with one decimal per number.
ModalityDescription weather_to_text(const WeatherRecord& record);

/// One raw input: a caption or transcript, a music embedding to be matched
/// against the query catalog, or a weather record.
struct FusionInput {
  Modality modality;
  std::variant<std::string, LatentVector, WeatherRecord> payload;
};

struct ResolvedInputs {
  std::vector<ModalityDescription> descriptions;
  // For each input, the matched query when the payload was an embedding.
  std::vector<std::optional<QueryMatch>> matches;
};

/// Turns raw inputs into text descriptions. Embeddings are replaced by the
/// best catalog query; errors carry the input index as subject.
ResolvedInputs resolve_inputs(const std::vector<FusionInput>& inputs,
                              const QueryCatalog& catalog);

struct FusionStep {
  Modality modality;
  std::string input;
  std::string output;
  bool paraphrased;
};

struct FusionResult {
  std::string prompt;
  std::vector<FusionStep> steps;  // input order
};

/// Paraphrases every over-long description, passes the rest through and
/// joins the results. The paraphraser is only called for flagged entries.
/// Provider errors are rethrown naming the modality, with its index as
/// subject.
FusionResult fuse(const std::vector<ModalityDescription>& ds,
                  const FusionConfig& cfg, Paraphraser& paraphraser);

}  // namespace lbk
