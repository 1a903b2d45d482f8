#include "lbk/formats.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <iterator>
#include <type_traits>

#include "json.hpp"
#include "lbk/error.hpp"
#include "lbk/npy.hpp"

namespace lbk {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

[[noreturn]] void invalid(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::kInvalidSpec, where + ": " + what);
}

json parse_json(std::string_view text, const std::string& where) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    invalid(where, std::string("malformed JSON at byte ") +
                       std::to_string(e.byte));
  }
}

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) invalid(where, "expected a JSON object");
}

void allow_keys(const json& j, std::initializer_list<std::string_view> keys,
                const std::string& where) {
  for (const auto& [k, v] : j.items()) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
      invalid(where, "unknown key '" + k + "'");
    }
  }
}

double get_real(const json& j, const char* key, const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end()) invalid(where, std::string("missing '") + key + "'");
  if (!it->is_number()) invalid(where, std::string("'") + key + "' must be a number");
  return it->get<double>();
}

template <typename T>
void read_opt(const json& j, const char* key, T& out, const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end()) return;
  if constexpr (std::is_same_v<T, bool>) {
    if (!it->is_boolean()) invalid(where, std::string("'") + key + "' must be true or false");
    out = it->get<bool>();
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!it->is_number()) invalid(where, std::string("'") + key + "' must be a number");
    out = it->get<double>();
  } else {
    if (!it->is_number_integer() || (std::is_unsigned_v<T> && it->get<long long>() < 0)) {
      invalid(where, std::string("'") + key + "' must be a non-negative integer");
    }
    out = it->get<T>();
  }
}

std::vector<double> real_array(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) invalid(where, "expected a non-empty array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& x : j) {
    if (!x.is_number()) invalid(where, "expected a non-empty array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

std::string get_string(const json& j, const char* key, const std::string& where) {
  const auto it = j.find(key);
  if (it == j.end() || !it->is_string()) {
    invalid(where, std::string("'") + key + "' must be a string");
  }
  return it->get<std::string>();
}

}  // namespace

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kIoFailure, "cannot open '" + path.string() + "'");
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorKind::kIoFailure, "error reading '" + path.string() + "'");
  return text;
}

BlendSpec parse_blend_spec(std::string_view json_text, const fs::path& base_dir) {
  const std::string where = "blend spec";
  const json j = parse_json(json_text, where);
  require_object(j, where);
  allow_keys(j, {"method", "styles", "eps_omega"}, where);

  BlendSpec spec;
  const std::string method = get_string(j, "method", where);
  if (method == "linear") {
    spec.method = BlendMethod::kLinear;
  } else if (method == "sli") {
    spec.method = BlendMethod::kSli;
  } else {
    invalid(where, "method must be \"linear\" or \"sli\", got \"" + method + "\"");
  }
  read_opt(j, "eps_omega", spec.eps_omega, where);
  if (!(spec.eps_omega > 0.0)) invalid(where, "eps_omega must be positive");

  const auto styles = j.find("styles");
  if (styles == j.end() || !styles->is_array() || styles->empty()) {
    invalid(where, "'styles' must be a non-empty array");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < styles->size(); ++i) {
    const json& s = (*styles)[i];
    const std::string at = where + " style #" + std::to_string(i);
    require_object(s, at);
    allow_keys(s, {"path", "weight"}, at);
    fs::path p = get_string(s, "path", at);
    if (p.is_relative()) p = base_dir / p;
    const double w = get_real(s, "weight", at);
    if (!std::isfinite(w) || w < 0.0) invalid(at, "weight must be finite and >= 0");
    sum += w;
    spec.styles.push_back({std::move(p), w});
  }
  if (!(sum > 0.0)) invalid(where, "style weights sum to zero");
  return spec;
}

BlendSpec load_blend_spec(const fs::path& path) {
  return parse_blend_spec(read_text_file(path), path.parent_path());
}

WeightedStyleSet load_style_set(const BlendSpec& spec) {
  std::vector<StyleEntry> entries;
  for (std::size_t i = 0; i < spec.styles.size(); ++i) {
    try {
      entries.push_back(
          {as_vector(read_npy(spec.styles[i].path)), spec.styles[i].weight, i});
    } catch (const Error& e) {
      throw e.with_subject(i);
    }
  }
  return WeightedStyleSet(std::move(entries));
}

std::vector<ReferenceStyle> load_references(const fs::path& path) {
  const std::string where = "references file '" + path.string() + "'";
  const json j = parse_json(read_text_file(path), where);
  require_object(j, where);
  allow_keys(j, {"references"}, where);
  const auto refs = j.find("references");
  if (refs == j.end() || !refs->is_array() || refs->empty()) {
    invalid(where, "'references' must be a non-empty array");
  }
  std::vector<ReferenceStyle> out;
  for (std::size_t i = 0; i < refs->size(); ++i) {
    const json& r = (*refs)[i];
    const std::string at = where + " entry #" + std::to_string(i);
    require_object(r, at);
    allow_keys(r, {"name", "embedding", "path", "weight"}, at);
    std::string name = get_string(r, "name", at);
    double weight = 1.0;
    read_opt(r, "weight", weight, at);
    const bool has_emb = r.contains("embedding");
    if (has_emb == r.contains("path")) {
      invalid(at, "give exactly one of 'embedding' or 'path'");
    }
    std::vector<double> values;
    if (has_emb) {
      values = real_array(r["embedding"], at);
    } else {
      fs::path p = get_string(r, "path", at);
      if (p.is_relative()) p = path.parent_path() / p;
      NpyArray a = read_npy(p);
      if (a.shape.size() != 1) invalid(at, "reference file must be 1-D");
      values = std::move(a.data);
    }
    out.push_back({std::move(name), LatentVector(std::move(values)), weight});
  }
  return out;
}

std::vector<LatentVector> load_generated(const fs::path& path) {
  std::error_code ec;
  if (fs::is_directory(path, ec)) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".npy") {
        files.push_back(entry.path());
      }
    }
    std::sort(files.begin(), files.end());
    std::vector<LatentVector> out;
    for (const auto& f : files) {
      for (auto& v : as_row_vectors(read_npy(f))) out.push_back(std::move(v));
    }
    if (out.empty()) {
      throw Error(ErrorKind::kEmptySet,
                  "no .npy embeddings in directory '" + path.string() + "'");
    }
    return out;
  }
  return as_row_vectors(read_npy(path));
}

std::vector<double> parse_real_list(std::string_view text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(',', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view item = text.substr(start, end - start);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size() ||
        !std::isfinite(value)) {
      throw Error(ErrorKind::kInvalidSpec,
                  "'" + std::string(text) + "' is not a comma-separated list of reals");
    }
    out.push_back(value);
    start = end + 1;
  }
  return out;
}

std::vector<FusionInput> load_fusion_inputs(const fs::path& path) {
  const std::string where = "fusion inputs '" + path.string() + "'";
  const json j = parse_json(read_text_file(path), where);
  require_object(j, where);
  allow_keys(j, {"inputs"}, where);
  const auto inputs = j.find("inputs");
  if (inputs == j.end() || !inputs->is_array()) {
    invalid(where, "'inputs' must be an array");
  }
  std::vector<FusionInput> out;
  for (std::size_t i = 0; i < inputs->size(); ++i) {
    const json& in = (*inputs)[i];
    const std::string at = where + " input #" + std::to_string(i);
    require_object(in, at);
    allow_keys(in, {"modality", "text", "embedding", "weather"}, at);
    const Modality m = parse_modality(get_string(in, "modality", at));
    const int kinds = static_cast<int>(in.contains("text")) +
                      static_cast<int>(in.contains("embedding")) +
                      static_cast<int>(in.contains("weather"));
    if (kinds != 1) invalid(at, "give exactly one of 'text', 'embedding', 'weather'");
    if (in.contains("text")) {
      out.push_back({m, get_string(in, "text", at)});
    } else if (in.contains("embedding")) {
      out.push_back({m, LatentVector(real_array(in["embedding"], at))});
    } else {
      const json& w = in["weather"];
      require_object(w, at);
      allow_keys(w, {"condition", "temperature_c", "wind_mps"}, at);
      out.push_back({m, WeatherRecord{get_string(w, "condition", at),
                                      get_real(w, "temperature_c", at),
                                      get_real(w, "wind_mps", at)}});
    }
  }
  return out;
}

FusionConfig load_fusion_config(const fs::path& path) {
  const std::string where = "fusion config '" + path.string() + "'";
  const json j = parse_json(read_text_file(path), where);
  require_object(j, where);
  allow_keys(j, {"verbosity_threshold", "paraphrase"}, where);
  FusionConfig cfg;
  read_opt(j, "verbosity_threshold", cfg.verbosity_threshold, where);
  if (const auto p = j.find("paraphrase"); p != j.end()) {
    require_object(*p, where);
    allow_keys(*p, {"l_max", "l_min", "length_penalty", "num_beams"}, where);
    read_opt(*p, "l_max", cfg.paraphrase.l_max, where);
    read_opt(*p, "l_min", cfg.paraphrase.l_min, where);
    read_opt(*p, "length_penalty", cfg.paraphrase.length_penalty, where);
    read_opt(*p, "num_beams", cfg.paraphrase.num_beams, where);
  }
  cfg.validate();
  return cfg;
}

QueryCatalog load_query_catalog(const fs::path& path) {
  const std::string where = "query catalog '" + path.string() + "'";
  const json j = parse_json(read_text_file(path), where);
  if (!j.is_array()) invalid(where, "expected a JSON array");
  std::vector<Query> queries;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string at = where + " entry #" + std::to_string(i);
    require_object(j[i], at);
    allow_keys(j[i], {"text", "embedding"}, at);
    queries.push_back({get_string(j[i], "text", at),
                       LatentVector(real_array(j[i]["embedding"], at))});
  }
  return QueryCatalog(std::move(queries));
}

std::vector<std::string> load_prompt_catalog(const fs::path& path) {
  const std::string where = "prompt catalog '" + path.string() + "'";
  const json j = parse_json(read_text_file(path), where);
  if (!j.is_array()) invalid(where, "expected a JSON array of strings");
  std::vector<std::string> out;
  for (const auto& p : j) {
    if (!p.is_string()) invalid(where, "expected a JSON array of strings");
    out.push_back(p.get<std::string>());
  }
  return out;
}

AttentionInputs load_attention_inputs(const fs::path& path) {
  if (path.extension() == ".npy") {
    const Matrix m = as_matrix(read_npy(path));
    return {m, m, m};
  }
  const std::string where = "attention inputs '" + path.string() + "'";
  const json j = parse_json(read_text_file(path), where);
  require_object(j, where);
  allow_keys(j, {"q", "k", "v"}, where);
  auto matrix = [&](const char* key) {
    const json& rows = j[key];
    if (!rows.is_array() || rows.empty()) {
      invalid(where, std::string("'") + key + "' must be a non-empty array of rows");
    }
    std::vector<std::vector<double>> out;
    for (const auto& r : rows) out.push_back(real_array(r, where + " '" + key + "'"));
    return Matrix::from_rows(out);
  };
  if (!j.contains("q")) invalid(where, "missing 'q'");
  const Matrix q = matrix("q");
  const Matrix k = j.contains("k") ? matrix("k") : q;
  const Matrix v = j.contains("v") ? matrix("v") : k;
  return {q, k, v};
}

SandboxConfig parse_sandbox_config(std::string_view json_text) {
  const std::string where = "sandbox config";
  const json j = parse_json(json_text, where);
  require_object(j, where);
  allow_keys(j, {"guidance_scale", "seed", "n_images", "channels", "positions",
                 "worker_threads", "rescale", "schedule"},
             where);
  SandboxConfig cfg;
  read_opt(j, "guidance_scale", cfg.guidance_scale, where);
  read_opt(j, "seed", cfg.seed, where);
  read_opt(j, "n_images", cfg.n_images, where);
  read_opt(j, "channels", cfg.channels, where);
  read_opt(j, "positions", cfg.positions, where);
  read_opt(j, "worker_threads", cfg.worker_threads, where);
  if (const auto r = j.find("rescale"); r != j.end()) {
    require_object(*r, where);
    allow_keys(*r, {"mu", "sigma"}, where + " rescale");
    read_opt(*r, "mu", cfg.rescale.mu, where);
    read_opt(*r, "sigma", cfg.rescale.sigma, where);
  }
  if (const auto s = j.find("schedule"); s != j.end()) {
    require_object(*s, where);
    allow_keys(*s, {"beta_start", "beta_end", "beta_schedule", "steps",
                    "clip_sample", "set_alpha_to_one"},
               where + " schedule");
    DdimScheduleConfig& sc = cfg.schedule;
    read_opt(*s, "beta_start", sc.beta_start, where);
    read_opt(*s, "beta_end", sc.beta_end, where);
    read_opt(*s, "steps", sc.steps, where);
    read_opt(*s, "clip_sample", sc.clip_sample, where);
    read_opt(*s, "set_alpha_to_one", sc.set_alpha_to_one, where);
    if (s->contains("beta_schedule")) {
      const std::string name = get_string(*s, "beta_schedule", where);
      if (name == "scaled_linear") {
        sc.beta_schedule = BetaSchedule::kScaledLinear;
      } else if (name == "linear") {
        sc.beta_schedule = BetaSchedule::kLinear;
      } else {
        invalid(where, "beta_schedule must be \"scaled_linear\" or \"linear\"");
      }
    }
  }
  cfg.validate();
  return cfg;
}

SandboxConfig load_sandbox_config(const fs::path& path) {
  return parse_sandbox_config(read_text_file(path));
}

}  // namespace lbk
