#include "lbk/fusion.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>

#include "lbk/error.hpp"
#include "lbk/metrics.hpp"

namespace lbk {

std::string_view to_string(Modality m) noexcept {
  switch (m) {
    case Modality::kImage: return "image";
    case Modality::kAudio: return "audio";
    case Modality::kMusic: return "music";
    case Modality::kWeather: return "weather";
    case Modality::kText: return "text";
  }
  return "unknown";
}

Modality parse_modality(std::string_view name) {
  for (Modality m : {Modality::kImage, Modality::kAudio, Modality::kMusic,
                     Modality::kWeather, Modality::kText}) {
    if (to_string(m) == name) return m;
  }
  throw Error(ErrorKind::kInvalidSpec,
              "unknown modality '" + std::string(name) + "'");
}

std::size_t count_words(std::string_view text) noexcept {
  std::size_t count = 0;
  bool in_word = false;
  for (unsigned char ch : text) {
    if (std::isspace(ch)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++count;
    }
  }
  return count;
}

QueryCatalog::QueryCatalog(std::vector<Query> queries)
    : queries_(std::move(queries)) {
  if (queries_.empty()) {
    throw Error(ErrorKind::kEmptySet, "query catalog is empty");
  }
  const std::size_t d = queries_.front().embedding.dim();
  for (std::size_t i = 0; i < queries_.size(); ++i) {
    const LatentVector& e = queries_[i].embedding;
    if (e.dim() != d) {
      throw Error(ErrorKind::kDimensionMismatch,
                  "query '" + queries_[i].text + "' has dimension " +
                      std::to_string(e.dim()) + ", expected " +
                      std::to_string(d),
                  i);
    }
    if (e.norm() == 0.0) {
      throw Error(ErrorKind::kZeroVector,
                  "query '" + queries_[i].text + "' has a zero embedding", i);
    }
  }
}

QueryMatch best_music_query(const LatentVector& music_embedding,
                            const QueryCatalog& catalog) {
  if (music_embedding.dim() != catalog.dim()) {
    throw Error(ErrorKind::kDimensionMismatch,
                "music embedding has dimension " +
                    std::to_string(music_embedding.dim()) +
                    ", catalog uses " + std::to_string(catalog.dim()));
  }
  if (music_embedding.norm() == 0.0) {
    throw Error(ErrorKind::kZeroVector, "music embedding is the zero vector");
  }
  std::size_t best = 0;
  double best_score = -2.0;
  const auto& qs = catalog.queries();
  for (std::size_t i = 0; i < qs.size(); ++i) {
    const double s = cosine_similarity(music_embedding, qs[i].embedding);
    if (s > best_score) {  // strict: earlier index wins ties
      best = i;
      best_score = s;
    }
  }
  return {best, qs[best].text, best_score};
}

void FusionConfig::validate() const {
  if (verbosity_threshold < 1) {
    throw Error(ErrorKind::kInvalidSpec, "verbosity threshold k must be >= 1");
  }
  if (paraphrase.l_min < 0 || paraphrase.l_min > paraphrase.l_max) {
    throw Error(ErrorKind::kInvalidSpec, "need 0 <= l_min <= l_max");
  }
  if (paraphrase.num_beams < 1) {
    throw Error(ErrorKind::kInvalidSpec, "num_beams must be >= 1");
  }
  if (!std::isfinite(paraphrase.length_penalty)) {
    throw Error(ErrorKind::kInvalidSpec, "length_penalty must be finite");
  }
}

bool needs_paraphrasing(const ModalityDescription& d, const FusionConfig& cfg) {
  return d.word_count > cfg.verbosity_threshold;
}

std::string concatenate_descriptions(
    const std::vector<ModalityDescription>& ds) {
  std::string out;
  for (const auto& d : ds) {
    if (d.text.empty()) continue;
    if (!out.empty()) out += ", ";
    out += d.text;
  }
  return out;
}

ModalityDescription weather_to_text(const WeatherRecord& record) {
  if (record.condition.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "weather condition is empty");
  }
  if (!std::isfinite(record.temperature_c) || !std::isfinite(record.wind_mps)) {
    throw Error(ErrorKind::kNonFinite, "weather record has non-finite fields");
  }
  // printf rounds the binary value half-to-even, so -3.25 prints as -3.2.
  char buf[96];
  std::snprintf(buf, sizeof buf, ", %.1f degrees, wind %.1f m/s",
                record.temperature_c, record.wind_mps);
  return {Modality::kWeather, record.condition + buf};
}

ResolvedInputs resolve_inputs(const std::vector<FusionInput>& inputs,
                              const QueryCatalog& catalog) {
  ResolvedInputs out;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const FusionInput& in = inputs[i];
    try {
      if (const auto* text = std::get_if<std::string>(&in.payload)) {
        out.descriptions.emplace_back(in.modality, *text);
        out.matches.emplace_back();
      } else if (const auto* emb = std::get_if<LatentVector>(&in.payload)) {
        QueryMatch m = best_music_query(*emb, catalog);
        out.descriptions.emplace_back(in.modality, m.text);
        out.matches.emplace_back(std::move(m));
      } else {
        out.descriptions.push_back(
            weather_to_text(std::get<WeatherRecord>(in.payload)));
        out.descriptions.back().modality = in.modality;
        out.matches.emplace_back();
      }
    } catch (const Error& e) {
      throw e.with_subject(i);
    }
  }
  return out;
}

FusionResult fuse(const std::vector<ModalityDescription>& ds,
                  const FusionConfig& cfg, Paraphraser& paraphraser) {
  cfg.validate();
  FusionResult result;
  std::vector<ModalityDescription> processed;
  processed.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const ModalityDescription& d = ds[i];
    const bool flagged = needs_paraphrasing(d, cfg);
    std::string text = d.text;
    if (flagged) {
      try {
        text = paraphraser.paraphrase({d.text, cfg.paraphrase});
      } catch (const Error& e) {
        throw Error(e.kind(),
                    std::string(to_string(d.modality)) + " description #" +
                        std::to_string(i) + ": " + std::string(e.message()),
                    i);
      }
    }
    result.steps.push_back({d.modality, d.text, text, flagged});
    processed.emplace_back(d.modality, std::move(text));
  }
  result.prompt = concatenate_descriptions(processed);
  return result;
}

}  // namespace lbk
