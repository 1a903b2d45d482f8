#include "cli.hpp"

#include <unistd.h>

#include <CLI11.hpp>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "lbk/attention.hpp"
#include "lbk/blending.hpp"
#include "lbk/error.hpp"
#include "lbk/formats.hpp"
#include "lbk/fusion.hpp"
#include "lbk/metrics.hpp"
#include "lbk/npy.hpp"
#include "lbk/sandbox.hpp"

#ifndef LBK_DATA_DIR
#define LBK_DATA_DIR "data"
#endif

namespace lbk::cli {
namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

enum class Format { kCsv, kJson };

// The seven weight pairs of the two-style evaluation grid.
constexpr double kWeightGrid[7][2] = {{0.0, 1.0},  {0.15, 0.85}, {0.25, 0.75},
                                      {0.5, 0.5},  {0.75, 0.25}, {0.85, 0.15},
                                      {1.0, 0.0}};
constexpr double kGuidanceGrid[] = {5, 10, 15, 20, 25, 30};

std::string num(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos) {
    return std::string(s);
  }
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header)
      : header_(std::move(header)) {}

  void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

  std::string str() const {
    std::string out;
    auto line = [&out](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i > 0) out += ',';
        out += csv_field(cells[i]);
      }
      out += "\r\n";
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return out;
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string join(const std::vector<double>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i > 0) out += ';';
    out += num(xs[i]);
  }
  return out;
}

std::string json_doc(const json& j) { return j.dump(2) + "\n"; }

struct Globals {
  std::string output;
  std::string format;
  std::uint64_t seed = 0;
  bool seed_given = false;
};

class Context {
 public:
  Context(const Globals& g, std::ostream& out) : globals_(g), out_(out) {}

  Format format(Format fallback) const {
    if (globals_.format == "csv") return Format::kCsv;
    if (globals_.format == "json") return Format::kJson;
    return fallback;
  }
  bool format_given() const { return !globals_.format.empty(); }
  std::optional<std::uint64_t> seed() const {
    if (!globals_.seed_given) return std::nullopt;
    return globals_.seed;
  }

  // Sends the document to --output when given, stdout otherwise.
  void emit(const std::string& doc) const {
    if (globals_.output.empty()) {
      out_ << doc;
      out_.flush();
      return;
    }
    const fs::path path = globals_.output;
    fs::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
      std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
      f << doc;
      f.flush();
      if (!f) {
        std::error_code ignored;
        fs::remove(tmp, ignored);
        throw Error(ErrorKind::kIoFailure,
                    "cannot write '" + path.string() + "'");
      }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
      fs::remove(tmp, ec);
      throw Error(ErrorKind::kIoFailure, "cannot write '" + path.string() + "'");
    }
  }

 private:
  const Globals& globals_;
  std::ostream& out_;
};

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kAntipodalVectors:
    case ErrorKind::kZeroVector:
    case ErrorKind::kNonFinite:
      return kExitNumeric;
    case ErrorKind::kProviderUnavailable:
      return kExitProviderUnavailable;
    case ErrorKind::kProviderFailure:
      return kExitProviderFailure;
    default:
      return kExitInvalidInput;
  }
}

// ---- blend ----------------------------------------------------------------

struct BlendArgs {
  std::string spec;
  std::string out;
};

void cmd_blend(const Context& ctx, const BlendArgs& args) {
  const BlendSpec spec = load_blend_spec(args.spec);
  auto blame = [&spec](const Error& e) {
    if (!e.subject() || *e.subject() >= spec.styles.size()) return e;
    return Error(e.kind(),
                 "style '" + spec.styles[*e.subject()].path.string() +
                     "': " + std::string(e.message()),
                 e.subject());
  };

  std::optional<BlendResult> result;
  try {
    const WeightedStyleSet set = normalize_weights(load_style_set(spec));
    result = spec.method == BlendMethod::kLinear
                 ? linear_blend(set)
                 : sli_blend(set, spec.eps_omega);
  } catch (const Error& e) {
    throw blame(e);
  }
  write_npy(args.out, to_npy(result->vector));

  const char* method = spec.method == BlendMethod::kLinear ? "linear" : "sli";
  std::vector<std::string> order_paths;
  for (std::size_t i : result->order_used) {
    order_paths.push_back(spec.styles[i].path.string());
  }
  const double norm = result->vector.norm();
  if (ctx.format(Format::kJson) == Format::kJson) {
    ctx.emit(json_doc({{"method", method},
                       {"order_used", result->order_used},
                       {"order_paths", order_paths},
                       {"omega_trace", result->omega_trace},
                       {"norm", norm},
                       {"dim", result->vector.dim()},
                       {"output", args.out}}));
  } else {
    std::string order;
    for (std::size_t i = 0; i < result->order_used.size(); ++i) {
      if (i > 0) order += ';';
      order += std::to_string(result->order_used[i]);
    }
    CsvTable t({"method", "order_used", "omega_trace", "norm", "dim", "output"});
    t.add({method, order, join(result->omega_trace), num(norm),
           std::to_string(result->vector.dim()), args.out});
    ctx.emit(t.str());
  }
}

// ---- wms ------------------------------------------------------------------

struct WmsArgs {
  std::vector<std::string> generated;
  std::string refs;
  std::vector<std::string> weights;
  bool grid = false;
};

void cmd_wms(const Context& ctx, const WmsArgs& args) {
  const std::vector<ReferenceStyle> refs = load_references(args.refs);

  std::vector<std::vector<double>> rows;
  if (args.grid) {
    if (refs.size() != 2) {
      throw Error(ErrorKind::kInvalidSpec,
                  "--grid needs exactly two references, got " +
                      std::to_string(refs.size()));
    }
    for (const auto& pair : kWeightGrid) rows.push_back({pair[0], pair[1]});
  } else if (!args.weights.empty()) {
    for (const auto& w : args.weights) rows.push_back(parse_real_list(w));
  } else {
    std::vector<double> w;
    for (const auto& r : refs) w.push_back(r.weight);
    rows.push_back(std::move(w));
  }
  for (const auto& w : rows) {
    if (w.size() != refs.size()) {
      throw Error(ErrorKind::kInvalidSpec,
                  std::to_string(w.size()) + " weights given for " +
                      std::to_string(refs.size()) + " references");
    }
  }
  if (args.generated.size() != 1 && args.generated.size() != rows.size()) {
    throw Error(ErrorKind::kInvalidSpec,
                "give one --generated set, or one per weight configuration (" +
                    std::to_string(rows.size()) + ")");
  }

  std::vector<std::vector<LatentVector>> sets;
  for (const auto& g : args.generated) sets.push_back(load_generated(g));

  std::vector<WmsReport> reports;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& gen = sets[sets.size() == 1 ? 0 : i];
    const EmbeddingSet es =
        EmbeddingSet(gen, refs).with_weights(rows[i]).normalized();
    reports.push_back(wms_score(es));
  }

  if (ctx.format(Format::kCsv) == Format::kCsv) {
    std::vector<std::string> header;
    for (const auto& r : refs) header.push_back("w_" + r.name);
    for (const auto& r : refs) header.push_back("MS_" + r.name);
    header.push_back("WMS");
    header.push_back("MS_GAP");
    CsvTable t(std::move(header));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      std::vector<std::string> cells;
      for (double w : rows[i]) cells.push_back(num(w));
      for (const auto& s : reports[i].per_style_ms) cells.push_back(num(s.ms));
      cells.push_back(num(reports[i].wms));
      cells.push_back(num(reports[i].ms_gap));
      t.add(std::move(cells));
    }
    ctx.emit(t.str());
    return;
  }
  json out = json::array();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    json weights = json::object();
    json ms = json::object();
    for (std::size_t k = 0; k < refs.size(); ++k) {
      weights[refs[k].name] = rows[i][k];
      ms[refs[k].name] = reports[i].per_style_ms[k].ms;
    }
    out.push_back({{"weights", weights},
                   {"ms", ms},
                   {"wms", reports[i].wms},
                   {"ms_gap", reports[i].ms_gap}});
  }
  ctx.emit(json_doc({{"rows", out}}));
}

// ---- attend ---------------------------------------------------------------

struct AttendArgs {
  std::string self;
  std::vector<std::string> refs;
  double mu = 0.0;
  double sigma = 1.0;
  bool auto_classify = false;
  double threshold = 0.5;
  std::string lambda_weights;
};

double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

void cmd_attend(const Context& ctx, const AttendArgs& args) {
  const AttentionInputs self = load_attention_inputs(args.self);
  std::vector<AttentionInputs> refs;
  for (const auto& r : args.refs) refs.push_back(load_attention_inputs(r));

  if (!args.lambda_weights.empty()) {
    const std::vector<double> w = parse_real_list(args.lambda_weights);
    if (refs.size() != 1 && refs.size() != w.size()) {
      throw Error(ErrorKind::kInvalidSpec,
                  "--lambda-weights needs one --ref, or one per weight");
    }
    std::vector<StyleBlock> blocks;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const AttentionInputs& r = refs[refs.size() == 1 ? 0 : i];
      blocks.push_back({r.k, r.v, w[i]});
    }
    const BlockAttentionOutput res = lambda_rescaled_attention(self.q, blocks);
    const std::vector<double> entropy = row_entropy(res.weights);
    if (ctx.format(Format::kJson) == Format::kJson) {
      ctx.emit(json_doc({{"mode", "lambda"},
                         {"weights", w},
                         {"lambdas", res.lambdas},
                         {"block_mass", res.block_mass},
                         {"entropy", entropy},
                         {"mean_entropy", mean_of(entropy)}}));
    } else {
      CsvTable t({"block", "weight", "lambda", "mass"});
      for (std::size_t i = 0; i < w.size(); ++i) {
        t.add({std::to_string(i), num(w[i]), num(res.lambdas[i]),
               num(res.block_mass[i])});
      }
      ctx.emit(t.str());
    }
    return;
  }

  if (refs.size() != 1) {
    throw Error(ErrorKind::kInvalidSpec,
                "shared attention takes exactly one --ref");
  }
  const AttentionInputs& ref = refs.front();
  RescaleParams rescale{args.mu, args.sigma};
  std::optional<StyleClass> cls;
  StyleClassifierConfig classifier;
  classifier.threshold = args.threshold;
  if (args.auto_classify) {
    cls = classify_style(ref.k, classifier);
    rescale = classifier.params_for(*cls);
  }
  const SharedAttentionOutput res = shared_attention(self, ref, rescale);
  const std::vector<double> entropy = row_entropy(res.weights);
  const double key_norm = mean_row_norm(ref.k);
  const std::string cls_name = cls ? std::string(to_string(*cls)) : "";

  if (ctx.format(Format::kJson) == Format::kJson) {
    ctx.emit(json_doc({{"mode", "shared"},
                       {"classification", cls ? json(cls_name) : json(nullptr)},
                       {"key_norm", key_norm},
                       {"threshold", args.threshold},
                       {"mu", rescale.mu},
                       {"sigma", rescale.sigma},
                       {"ref_mass", res.ref_mass},
                       {"entropy", entropy},
                       {"mean_entropy", mean_of(entropy)}}));
  } else {
    CsvTable t({"classification", "key_norm", "mu", "sigma", "ref_mass",
                "mean_entropy"});
    t.add({cls_name, num(key_norm), num(rescale.mu), num(rescale.sigma),
           num(res.ref_mass), num(mean_of(entropy))});
    ctx.emit(t.str());
  }
}

// ---- fuse -----------------------------------------------------------------

struct FuseArgs {
  std::string inputs;
  std::string config;
  std::string provider;
  std::string catalog = std::string(LBK_DATA_DIR) + "/music_queries.json";
  bool explain = false;
};

void cmd_fuse(const Context& ctx, const FuseArgs& args) {
  const std::vector<FusionInput> inputs = load_fusion_inputs(args.inputs);
  const FusionConfig cfg =
      args.config.empty() ? FusionConfig{} : load_fusion_config(args.config);
  const QueryCatalog catalog = load_query_catalog(args.catalog);
  const ResolvedInputs resolved = resolve_inputs(inputs, catalog);

  std::string locator = args.provider;
  if (locator.empty()) {
    if (const char* env = std::getenv("LBK_PROVIDER")) locator = env;
  }
  std::unique_ptr<Paraphraser> paraphraser =
      locator.empty()
          ? std::make_unique<UnavailableParaphraser>()
          : make_paraphraser(ProviderBinding::parse(locator));

  const FusionResult fr = fuse(resolved.descriptions, cfg, *paraphraser);

  if (!ctx.format_given() && !args.explain) {
    ctx.emit(fr.prompt + "\n");
    return;
  }
  if (ctx.format(Format::kJson) == Format::kJson) {
    json doc = {{"prompt", fr.prompt}};
    if (args.explain) {
      json steps = json::array();
      for (std::size_t i = 0; i < fr.steps.size(); ++i) {
        const FusionStep& s = fr.steps[i];
        json match = nullptr;
        if (const auto& m = resolved.matches[i]) {
          match = {{"index", m->index}, {"text", m->text}, {"score", m->score}};
        }
        steps.push_back({{"index", i},
                         {"modality", std::string(to_string(s.modality))},
                         {"word_count", count_words(s.input)},
                         {"paraphrased", s.paraphrased},
                         {"best_query", match},
                         {"input", s.input},
                         {"output", s.output}});
      }
      doc["steps"] = steps;
    }
    ctx.emit(json_doc(doc));
    return;
  }
  if (!args.explain) {
    CsvTable t({"prompt"});
    t.add({fr.prompt});
    ctx.emit(t.str());
    return;
  }
  // One row per modality, then the fused prompt as the last row.
  CsvTable t({"index", "modality", "word_count", "paraphrased", "best_query",
              "best_query_score", "input", "output"});
  for (std::size_t i = 0; i < fr.steps.size(); ++i) {
    const FusionStep& s = fr.steps[i];
    const auto& m = resolved.matches[i];
    t.add({std::to_string(i), std::string(to_string(s.modality)),
           std::to_string(count_words(s.input)),
           s.paraphrased ? "true" : "false", m ? m->text : "",
           m ? num(m->score) : "", s.input, s.output});
  }
  t.add({"", "fused", std::to_string(count_words(fr.prompt)), "", "", "", "",
         fr.prompt});
  ctx.emit(t.str());
}

// ---- sandbox --------------------------------------------------------------

struct SandboxArgs {
  std::string config;
  bool dump_schedule = false;
  bool guidance_grid = false;
  std::size_t threads = 0;
};

json config_json(const SandboxConfig& c) {
  return {{"guidance_scale", c.guidance_scale},
          {"seed", c.seed},
          {"n_images", c.n_images},
          {"channels", c.channels},
          {"positions", c.positions},
          {"rescale", {{"mu", c.rescale.mu}, {"sigma", c.rescale.sigma}}},
          {"schedule",
           {{"beta_start", c.schedule.beta_start},
            {"beta_end", c.schedule.beta_end},
            {"beta_schedule", c.schedule.beta_schedule ==
                                      BetaSchedule::kScaledLinear
                                  ? "scaled_linear"
                                  : "linear"},
            {"steps", c.schedule.steps},
            {"clip_sample", c.schedule.clip_sample},
            {"set_alpha_to_one", c.schedule.set_alpha_to_one}}}};
}

void cmd_sandbox(const Context& ctx, const SandboxArgs& args) {
  SandboxConfig cfg =
      args.config.empty() ? SandboxConfig{} : load_sandbox_config(args.config);
  if (const auto seed = ctx.seed()) cfg.seed = *seed;
  if (args.threads > 0) cfg.worker_threads = args.threads;
  cfg.validate();

  if (args.dump_schedule) {
    const DdimSchedule s = build_schedule(cfg.schedule);
    if (ctx.format(Format::kCsv) == Format::kCsv) {
      CsvTable t({"t", "beta", "alpha", "alpha_cumprod"});
      for (std::size_t i = 0; i < s.betas.size(); ++i) {
        t.add({std::to_string(i), num(s.betas[i]), num(s.alphas[i]),
               num(s.alpha_cumprod[i])});
      }
      ctx.emit(t.str());
    } else {
      ctx.emit(json_doc({{"betas", s.betas},
                         {"alphas", s.alphas},
                         {"alpha_cumprod", s.alpha_cumprod},
                         {"final_alpha_cumprod", s.final_alpha_cumprod}}));
    }
    return;
  }

  if (args.guidance_grid) {
    std::vector<std::pair<double, SandboxReport>> runs;
    for (double g : kGuidanceGrid) {
      SandboxConfig c = cfg;
      c.guidance_scale = g;
      runs.emplace_back(g, run_sandbox(c));
    }
    if (ctx.format(Format::kJson) == Format::kJson) {
      json rows = json::array();
      for (const auto& [g, r] : runs) {
        rows.push_back({{"guidance_scale", g},
                        {"initial_stat_distance", r.initial_stat_distance},
                        {"final_stat_distance", r.final_stat_distance},
                        {"final_ref_mass", r.final_ref_mass}});
      }
      json base = config_json(cfg);
      base.erase("guidance_scale");
      ctx.emit(json_doc({{"config", base}, {"rows", rows}}));
    } else {
      CsvTable t({"guidance_scale", "initial_stat_distance",
                  "final_stat_distance", "final_ref_mass"});
      for (const auto& [g, r] : runs) {
        t.add({num(g), num(r.initial_stat_distance),
               num(r.final_stat_distance), num(r.final_ref_mass)});
      }
      ctx.emit(t.str());
    }
    return;
  }

  const SandboxReport r = run_sandbox(cfg);
  const std::size_t steps = r.per_step_stat_distance.size();
  if (ctx.format(Format::kJson) == Format::kJson) {
    json per_step = json::array();
    for (std::size_t i = 0; i < steps; ++i) {
      per_step.push_back({{"step", i},
                          {"timestep", steps - 1 - i},
                          {"strength", r.per_step_strength[i]},
                          {"ref_mass", r.per_step_ref_mass[i]},
                          {"stat_distance", r.per_step_stat_distance[i]}});
    }
    ctx.emit(json_doc({{"config", config_json(cfg)},
                       {"initial_stat_distance", r.initial_stat_distance},
                       {"final_stat_distance", r.final_stat_distance},
                       {"final_ref_mass", r.final_ref_mass},
                       {"per_step", per_step}}));
  } else {
    CsvTable t({"step", "timestep", "strength", "ref_mass", "stat_distance"});
    for (std::size_t i = 0; i < steps; ++i) {
      t.add({std::to_string(i), std::to_string(steps - 1 - i),
             num(r.per_step_strength[i]), num(r.per_step_ref_mass[i]),
             num(r.per_step_stat_distance[i])});
    }
    ctx.emit(t.str());
  }
}

// ---- catalog --------------------------------------------------------------

struct CatalogArgs {
  std::string kind = "prompts";
  std::string file;
};

void cmd_catalog(const Context& ctx, const CatalogArgs& args) {
  const bool prompts = args.kind == "prompts";
  const std::string file =
      !args.file.empty()
          ? args.file
          : std::string(LBK_DATA_DIR) +
                (prompts ? "/prompts.json" : "/music_queries.json");
  std::vector<std::string> texts;
  std::size_t dim = 0;
  if (prompts) {
    texts = load_prompt_catalog(file);
  } else {
    const QueryCatalog c = load_query_catalog(file);
    dim = c.dim();
    for (const auto& q : c.queries()) texts.push_back(q.text);
  }
  if (ctx.format(Format::kJson) == Format::kJson) {
    json doc = {{"kind", args.kind}, {"count", texts.size()}, {"entries", texts}};
    if (!prompts) doc["embedding_dim"] = dim;
    ctx.emit(json_doc(doc));
  } else {
    CsvTable t({"index", "text"});
    for (std::size_t i = 0; i < texts.size(); ++i) {
      t.add({std::to_string(i), texts[i]});
    }
    ctx.emit(t.str());
  }
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Weighted multi-reference style blending toolkit", "lbk"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--output", g.output,
                 "Write the report here instead of standard output");
  app.add_option("--format", g.format, "Report format")
      ->check(CLI::IsMember({"csv", "json"}));
  auto* seed_opt = app.add_option("--seed", g.seed, "Override the RNG seed");

  std::function<void(const Context&)> action;

  BlendArgs blend;
  auto* sc_blend = app.add_subcommand("blend", "Blend style vectors");
  sc_blend->add_option("--spec", blend.spec, "Blend spec JSON")->required();
  sc_blend->add_option("--out", blend.out, "Output .npy vector")->required();
  sc_blend->callback([&] { action = [&](const Context& c) { cmd_blend(c, blend); }; });

  WmsArgs wms;
  auto* sc_wms = app.add_subcommand("wms", "Weighted multi-style scores");
  sc_wms->add_option("--generated", wms.generated,
                     "Generated embeddings (.npy file or directory); repeat "
                     "once per weight configuration")
      ->required()
      ->expected(1)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  sc_wms->add_option("--refs", wms.refs, "Reference styles JSON")->required();
  auto* weights_opt =
      sc_wms->add_option("--weights", wms.weights,
                         "Comma-separated weights; repeat for more rows")
          ->expected(1)
          ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  sc_wms->add_flag("--grid", wms.grid, "Evaluate the seven two-style weight pairs")
      ->excludes(weights_opt);
  sc_wms->callback([&] { action = [&](const Context& c) { cmd_wms(c, wms); }; });

  AttendArgs attend;
  auto* sc_attend = app.add_subcommand("attend", "Shared attention diagnostics");
  sc_attend->add_option("--self", attend.self, "Self tokens (.npy or JSON)")
      ->required();
  sc_attend->add_option("--ref", attend.refs, "Reference tokens; repeatable")
      ->required()
      ->expected(1)
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  auto* mu_opt = sc_attend->add_option("--mu", attend.mu, "Reference logit shift");
  auto* sigma_opt =
      sc_attend->add_option("--sigma", attend.sigma, "Reference logit scale");
  auto* auto_opt =
      sc_attend->add_flag("--auto-classify", attend.auto_classify,
                          "Pick {mu, sigma} from the reference key norm");
  auto_opt->excludes(mu_opt)->excludes(sigma_opt);
  sc_attend->add_option("--threshold", attend.threshold, "Key-norm threshold")
      ->needs(auto_opt);
  auto* lambda_opt = sc_attend->add_option(
      "--lambda-weights", attend.lambda_weights,
      "Per-style weights; switches to lambda rescaling");
  lambda_opt->excludes(auto_opt)->excludes(mu_opt)->excludes(sigma_opt);
  sc_attend->callback([&] { action = [&](const Context& c) { cmd_attend(c, attend); }; });

  FuseArgs fuse_args;
  auto* sc_fuse = app.add_subcommand("fuse", "Fuse modality descriptions into a prompt");
  sc_fuse->add_option("--inputs", fuse_args.inputs, "Inputs JSON")->required();
  sc_fuse->add_option("--config", fuse_args.config, "Fusion config JSON");
  sc_fuse->add_option("--provider", fuse_args.provider,
                      "Paraphrase provider: fixture:<file> or command:<cmd> "
                      "(default: $LBK_PROVIDER)");
  sc_fuse->add_option("--catalog", fuse_args.catalog, "Music query catalog")
      ->capture_default_str();
  sc_fuse->add_flag("--explain", fuse_args.explain,
                    "Report per-modality decisions");
  sc_fuse->callback([&] { action = [&](const Context& c) { cmd_fuse(c, fuse_args); }; });

  SandboxArgs sandbox;
  auto* sc_sandbox = app.add_subcommand("sandbox", "Toy style-aligned denoising loop");
  sc_sandbox->add_option("--config", sandbox.config, "Sandbox config JSON");
  auto* dump_opt = sc_sandbox->add_flag("--dump-schedule", sandbox.dump_schedule,
                                        "Emit the noise schedule only");
  sc_sandbox->add_flag("--guidance-grid", sandbox.guidance_grid,
                       "Run guidance 5, 10, ..., 30")
      ->excludes(dump_opt);
  sc_sandbox->add_option("--threads", sandbox.threads, "Worker threads")
      ->check(CLI::PositiveNumber);
  sc_sandbox->callback([&] { action = [&](const Context& c) { cmd_sandbox(c, sandbox); }; });

  CatalogArgs catalog;
  auto* sc_catalog = app.add_subcommand("catalog", "List shipped prompt or query catalogs");
  sc_catalog->add_option("--kind", catalog.kind, "prompts or queries")
      ->check(CLI::IsMember({"prompts", "queries"}))
      ->capture_default_str();
  sc_catalog->add_option("--file", catalog.file, "Catalog file override");
  sc_catalog->callback([&] { action = [&](const Context& c) { cmd_catalog(c, catalog); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalidInput;
  }
  g.seed_given = seed_opt->count() > 0;

  const Context ctx(g, out);
  try {
    action(ctx);
  } catch (const Error& e) {
    err << "lbk: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "lbk: " << e.what() << "\n";
    return kExitInvalidInput;
  }
  return kExitOk;
}

}  // namespace lbk::cli
