#include "negkit/config.hpp"

#include <cmath>
#include <fstream>

#include "negkit/errors.hpp"

namespace negkit {

namespace {

double number_field(const njson& v, const char* key) {
  if (!v.is_number()) fail(ErrKind::MalformedConfig, std::string(key) + " must be a number");
  return v.get<double>();
}

int int_field(const njson& v, const char* key) {
  if (!v.is_number_integer()) {
    fail(ErrKind::MalformedConfig, std::string(key) + " must be an integer");
  }
  return v.get<int>();
}

std::string string_field(const njson& v, const char* key) {
  if (!v.is_string()) fail(ErrKind::MalformedConfig, std::string(key) + " must be a string");
  return v.get<std::string>();
}

}  // namespace

void apply_config_json(ToolConfig& config, const njson& j) {
  if (!j.is_object()) fail(ErrKind::MalformedConfig, "config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "beta") {
      config.beta = number_field(value, "beta");
    } else if (key == "iou_thresh") {
      config.iou_thresh = number_field(value, "iou_thresh");
    } else if (key == "score_thresh") {
      config.score_thresh = number_field(value, "score_thresh");
    } else if (key == "retry_limit") {
      config.retry_limit = int_field(value, "retry_limit");
    } else if (key == "parallelism") {
      config.parallelism = int_field(value, "parallelism");
    } else if (key == "max_area_ratio") {
      config.max_area_ratio = number_field(value, "max_area_ratio");
    } else if (key == "label_size") {
      config.label_size = number_field(value, "label_size");
    } else if (key == "split") {
      config.split = string_field(value, "split");
    } else if (key == "seed") {
      if (!value.is_number_unsigned()) {
        fail(ErrKind::MalformedConfig, "seed must be a non-negative integer");
      }
      config.seed = value.get<std::uint64_t>();
    } else if (key == "protocol") {
      config.protocol = string_field(value, "protocol");
    } else if (key == "cue_lexicon") {
      config.cue_lexicon = string_field(value, "cue_lexicon");
    } else if (key == "un_exclusions") {
      config.un_exclusions = string_field(value, "un_exclusions");
    } else if (key == "endpoint_env") {
      config.endpoint_env = string_field(value, "endpoint_env");
    } else if (key == "api_key_env") {
      config.api_key_env = string_field(value, "api_key_env");
    } else if (key == "generator_model") {
      config.generator_model = string_field(value, "generator_model");
    } else if (key == "vqa_model") {
      config.vqa_model = string_field(value, "vqa_model");
    } else if (key == "request_timeout_s") {
      config.request_timeout_s = int_field(value, "request_timeout_s");
    } else {
      fail(ErrKind::UnknownKey, "unknown config key '" + key + "'");
    }
  }
  validate_config(config);
}

void validate_config(const ToolConfig& config) {
  if (!std::isfinite(config.beta) || config.beta < 1.0) {
    fail(ErrKind::MalformedConfig, "beta must be finite and >= 1");
  }
  if (!std::isfinite(config.iou_thresh) || config.iou_thresh <= 0.0 ||
      config.iou_thresh >= 1.0) {
    fail(ErrKind::MalformedConfig, "iou_thresh must lie in (0, 1)");
  }
  if (!std::isfinite(config.score_thresh) || config.score_thresh < 0.0 ||
      config.score_thresh > 1.0) {
    fail(ErrKind::MalformedConfig, "score_thresh must lie in [0, 1]");
  }
  if (config.retry_limit < 0) fail(ErrKind::MalformedConfig, "retry_limit must be >= 0");
  if (config.parallelism < 1) fail(ErrKind::MalformedConfig, "parallelism must be >= 1");
  if (!std::isfinite(config.max_area_ratio) || config.max_area_ratio <= 0.0 ||
      config.max_area_ratio > 1.0) {
    fail(ErrKind::MalformedConfig, "max_area_ratio must lie in (0, 1]");
  }
  if (!std::isfinite(config.label_size) || config.label_size <= 0.0) {
    fail(ErrKind::MalformedConfig, "label_size must be positive");
  }
  if (config.split != "S" && config.split != "M" && config.split != "L") {
    fail(ErrKind::MalformedConfig, "split must be S, M, or L");
  }
  if (config.protocol != "coco" && config.protocol != "ap50") {
    fail(ErrKind::MalformedConfig, "protocol must be 'coco' or 'ap50'");
  }
  if (config.request_timeout_s < 1) {
    fail(ErrKind::MalformedConfig, "request_timeout_s must be >= 1");
  }
}

ToolConfig load_config_file(const std::string& path, ToolConfig base) {
  std::ifstream in(path);
  if (!in) fail(ErrKind::IoError, "cannot open config file " + path);
  njson j;
  try {
    in >> j;
  } catch (const njson::exception& e) {
    fail(ErrKind::MalformedConfig, path + " is not valid JSON: " + e.what());
  }
  apply_config_json(base, j);
  return base;
}

njson config_to_json(const ToolConfig& config) {
  return njson{{"beta", config.beta},
               {"iou_thresh", config.iou_thresh},
               {"score_thresh", config.score_thresh},
               {"retry_limit", config.retry_limit},
               {"parallelism", config.parallelism},
               {"max_area_ratio", config.max_area_ratio},
               {"label_size", config.label_size},
               {"split", config.split},
               {"seed", config.seed},
               {"protocol", config.protocol},
               {"cue_lexicon", config.cue_lexicon},
               {"un_exclusions", config.un_exclusions},
               {"endpoint_env", config.endpoint_env},
               {"api_key_env", config.api_key_env},
               {"generator_model", config.generator_model},
               {"vqa_model", config.vqa_model},
               {"request_timeout_s", config.request_timeout_s}};
}

Lexicons lexicons_from_config(const ToolConfig& config) {
  Lexicons lex = Lexicons::builtin();
  if (!config.cue_lexicon.empty()) lex.cues = load_term_file(config.cue_lexicon);
  if (!config.un_exclusions.empty()) {
    lex.un_exclusions = load_term_file(config.un_exclusions);
  }
  return lex;
}

PipelineConfig pipeline_config(const ToolConfig& config, Execution exec) {
  PipelineConfig pc;
  pc.split = config.split;
  pc.seed = config.seed;
  pc.retry_limit = config.retry_limit;
  pc.max_area_ratio = config.max_area_ratio;
  pc.label_size = config.label_size;
  pc.generator_model = config.generator_model;
  pc.vqa_model = config.vqa_model;
  pc.exec = exec;
  return pc;
}

}  // namespace negkit
