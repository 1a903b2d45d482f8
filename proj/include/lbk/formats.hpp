#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "lbk/attention.hpp"
#include "lbk/blending.hpp"
#include "lbk/fusion.hpp"
#include "lbk/metrics.hpp"
#include "lbk/sandbox.hpp"

// JSON input files. Every loader rejects unknown keys and reports syntax or
// schema problems as InvalidSpec (IoFailure when the file cannot be read).
// Values that parse but make no sense as data, such as ragged matrices,
// keep the kind the data types raise.

namespace lbk {

struct BlendSpec {
  struct Style {
    std::filesystem::path path;  // resolved against the spec's directory
    double weight;
  };
  BlendMethod method = BlendMethod::kSli;
  std::vector<Style> styles;
  double eps_omega = kDefaultEpsOmega;
};

/// {"method": "linear"|"sli", "styles": [{"path", "weight"}], "eps_omega"?}
BlendSpec parse_blend_spec(std::string_view json_text,
                           const std::filesystem::path& base_dir);
BlendSpec load_blend_spec(const std::filesystem::path& path);

/// Reads each style's vector file. Errors carry the style index as subject.
WeightedStyleSet load_style_set(const BlendSpec& spec);

/// {"references": [{"name", "embedding": [...] | "path": "x.npy",
///  "weight"?}]}. Paths are relative to the file.
std::vector<ReferenceStyle> load_references(const std::filesystem::path& path);

/// A .npy file (1-D: one vector, 2-D: one per row) or a directory whose .npy
/// files are read in name order.
std::vector<LatentVector> load_generated(const std::filesystem::path& path);

/// Comma-separated reals, e.g. "0.15,0.85".
std::vector<double> parse_real_list(std::string_view text);

/// {"inputs": [{"modality", "text" | "embedding" | "weather"}]}
std::vector<FusionInput> load_fusion_inputs(const std::filesystem::path& path);

/// {"verbosity_threshold"?, "paraphrase"?: {"l_max", "l_min",
///  "length_penalty", "num_beams"}}; missing keys keep their defaults.
FusionConfig load_fusion_config(const std::filesystem::path& path);

/// JSON array of {"text", "embedding"}.
QueryCatalog load_query_catalog(const std::filesystem::path& path);

/// JSON array of prompt strings.
std::vector<std::string> load_prompt_catalog(const std::filesystem::path& path);

/// Sandbox settings; missing keys keep their defaults.
SandboxConfig parse_sandbox_config(std::string_view json_text);
SandboxConfig load_sandbox_config(const std::filesystem::path& path);

/// Token matrices for attention. A .npy matrix is used as Q = K = V; a JSON
/// file holds {"q": [[...]], "k"?: ..., "v"?: ...} with k defaulting to q
/// and v to k.
AttentionInputs load_attention_inputs(const std::filesystem::path& path);

/// Entire file contents. Throws IoFailure.
std::string read_text_file(const std::filesystem::path& path);

}  // namespace lbk
