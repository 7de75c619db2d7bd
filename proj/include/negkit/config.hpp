#pragma once

// Tool-wide configuration.  A config file is a flat JSON object; unknown keys
// are rejected outright (UnknownKey) so typos never silently fall back to a
// default.  Precedence is: built-in default < config file < explicit CLI
// flag; the CLI applies the layers in that order.

#include <cstdint>
#include <string>

#include "negkit/execution.hpp"
#include "negkit/json.hpp"
#include "negkit/lexicon.hpp"
#include "negkit/pipeline.hpp"

namespace negkit {

struct ToolConfig {
  double beta = 2.0;            // cue boost, >= 1
  double iou_thresh = 0.5;      // (0, 1)
  double score_thresh = 0.3;    // [0, 1]
  int retry_limit = 3;          // >= 0
  int parallelism = 8;          // >= 1 worker threads
  double max_area_ratio = 0.85; // (0, 1]
  double label_size = 20.0;     // > 0 px
  std::string split = "S";      // S | M | L
  std::uint64_t seed = 0;
  std::string protocol = "coco";  // coco | ap50
  std::string cue_lexicon;        // optional term-file overriding builtin cues
  std::string un_exclusions;      // optional term-file overriding un- exclusions
  std::string endpoint_env = "NEGKIT_ENDPOINT";
  std::string api_key_env = "NEGKIT_API_KEY";
  std::string generator_model = "caption-gen-v1";
  std::string vqa_model = "vqa-align-v1";
  int request_timeout_s = 30;  // >= 1
};

// Applies a flat JSON object onto config.  Unknown keys -> UnknownKey; wrong
// types or out-of-range values -> MalformedConfig.
void apply_config_json(ToolConfig& config, const njson& j);

// Range-checks every field (MalformedConfig on violation).
void validate_config(const ToolConfig& config);

// Reads and applies a config file over the given base.
ToolConfig load_config_file(const std::string& path, ToolConfig base = ToolConfig{});

njson config_to_json(const ToolConfig& config);

// Builtin lexicons with any configured term-file overrides applied.
Lexicons lexicons_from_config(const ToolConfig& config);

// The pipeline-facing slice of the config.
PipelineConfig pipeline_config(const ToolConfig& config, Execution exec);

}  // namespace negkit
