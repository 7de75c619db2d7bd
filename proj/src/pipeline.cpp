#include "negkit/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "negkit/errors.hpp"
#include "negkit/rng.hpp"
#include "negkit/textparse.hpp"

namespace negkit {

namespace {

void check_pipeline_config(const PipelineConfig& config) {
  if (config.split != "S" && config.split != "M" && config.split != "L") {
    fail(ErrKind::MalformedConfig, "split must be S, M, or L");
  }
  if (config.retry_limit < 0) {
    fail(ErrKind::MalformedConfig, "retry limit must be >= 0");
  }
  if (!std::isfinite(config.max_area_ratio) || config.max_area_ratio <= 0.0 ||
      config.max_area_ratio > 1.0) {
    fail(ErrKind::MalformedConfig, "max area ratio must lie in (0, 1]");
  }
  if (!std::isfinite(config.label_size) || config.label_size <= 0.0) {
    fail(ErrKind::MalformedConfig, "label size must be positive");
  }
}

std::string require_string(const njson& j, const char* key, const char* where,
                           ErrKind kind) {
  if (!j.contains(key) || !j[key].is_string() || j[key].get<std::string>().empty()) {
    fail(kind, std::string(where) + " needs a non-empty string '" + key + "'");
  }
  return j[key].get<std::string>();
}

// True when the caption carries at least one negation cue; a blank caption
// carries none.
bool caption_has_cue(const std::string& caption) {
  try {
    std::vector<Token> tokens = tokenize(caption);
    detect_cues(tokens);
    for (const Token& token : tokens) {
      if (token.is_cue()) return true;
    }
  } catch (const Error&) {
  }
  return false;
}

// Distinct cue surfaces across both captions, sorted.
std::vector<std::string> cue_surfaces(const std::string& a, const std::string& b) {
  std::set<std::string> cues;
  for (const std::string* text : {&a, &b}) {
    try {
      std::vector<Token> tokens = tokenize(*text);
      detect_cues(tokens);
      for (const Token& token : tokens) {
        if (token.is_cue()) cues.insert(token.surface);
      }
    } catch (const Error&) {
    }
  }
  return {cues.begin(), cues.end()};
}

}  // namespace

std::vector<ImageAnnotation> read_annotations_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrKind::IoError, "cannot open annotations file " + path);

  std::vector<ImageAnnotation> images;
  std::set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path + " line " + std::to_string(line_no);
    njson j;
    try {
      j = njson::parse(line);
    } catch (const njson::exception& e) {
      fail(ErrKind::FormatError, where + ": invalid JSON: " + e.what());
    }
    if (!j.is_object()) fail(ErrKind::FormatError, where + ": expected a JSON object");

    ImageAnnotation image;
    if (!j.contains("image_id")) fail(ErrKind::FormatError, where + ": missing image_id");
    image.image_id = id_from_json(j["image_id"], "image_id");
    if (!seen_ids.insert(image.image_id).second) {
      fail(ErrKind::FormatError, where + ": duplicate image_id " + image.image_id);
    }
    for (const char* key : {"width", "height"}) {
      if (!j.contains(key) || !j[key].is_number()) {
        fail(ErrKind::FormatError, where + ": missing numeric '" + key + "'");
      }
    }
    image.width = j["width"].get<double>();
    image.height = j["height"].get<double>();
    if (!std::isfinite(image.width) || !std::isfinite(image.height) || image.width <= 0.0 ||
        image.height <= 0.0) {
      fail(ErrKind::FormatError, where + ": image extent must be positive");
    }
    if (!j.contains("regions") || !j["regions"].is_array()) {
      fail(ErrKind::FormatError, where + ": missing 'regions' array");
    }
    for (const njson& r : j["regions"]) {
      if (!r.is_object()) fail(ErrKind::FormatError, where + ": region must be an object");
      RegionAnnotation region;
      region.image_id = image.image_id;
      region.image_w = image.width;
      region.image_h = image.height;
      if (!r.contains("box")) fail(ErrKind::FormatError, where + ": region missing 'box'");
      region.box = box_from_json(r["box"]);
      if (region.box.x1 < 0.0 || region.box.y1 < 0.0 || region.box.x2 > image.width ||
          region.box.y2 > image.height) {
        fail(ErrKind::BoxOutOfBounds, where + ": region box exceeds the image extent");
      }
      region.phrase = require_string(r, "phrase", where.c_str(), ErrKind::FormatError);
      region.phrase_type =
          require_string(r, "phrase_type", where.c_str(), ErrKind::FormatError);
      image.regions.push_back(std::move(region));
    }
    images.push_back(std::move(image));
  }
  return images;
}

std::uint64_t region_seed(std::uint64_t base_seed, const std::string& image_id) {
  return splitmix64(base_seed ^ fnv1a64(image_id));
}

std::vector<std::size_t> select_regions(const ImageAnnotation& image, std::uint64_t seed,
                                        double max_area_ratio) {
  if (!std::isfinite(max_area_ratio) || max_area_ratio <= 0.0 || max_area_ratio > 1.0) {
    fail(ErrKind::MalformedConfig, "max area ratio must lie in (0, 1]");
  }
  std::map<std::string, std::size_t> type_counts;
  for (const RegionAnnotation& region : image.regions) ++type_counts[region.phrase_type];
  for (const auto& [type, count] : type_counts) {
    if (count > 5) {
      fail(ErrKind::NoEligibleRegions, "image " + image.image_id + ": phrase type '" +
                                           type + "' occurs " + std::to_string(count) +
                                           " times (limit 5)");
    }
  }

  const double budget = max_area_ratio * image.width * image.height;
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < image.regions.size(); ++i) {
    if (image.regions[i].box.area() <= budget) eligible.push_back(i);
  }
  if (eligible.empty()) {
    fail(ErrKind::NoEligibleRegions,
         "image " + image.image_id + ": no box within the area budget");
  }
  Rng rng(seed);
  return rng.sample(eligible, std::min<std::size_t>(2, eligible.size()));
}

OverlaySpec overlay_for_region(const ImageAnnotation& image, std::size_t region_index,
                               double label_size) {
  if (region_index >= image.regions.size()) {
    fail(ErrKind::UsageError, "region index out of range");
  }
  const RegionAnnotation& target = image.regions[region_index];
  std::vector<Box> siblings;
  for (std::size_t i = 0; i < image.regions.size(); ++i) {
    if (i == region_index) continue;
    if (image.regions[i].phrase_type == target.phrase_type) {
      siblings.push_back(image.regions[i].box);
    }
  }
  return render_overlay(image.width, image.height, target.box, siblings, label_size);
}

njson build_generation_request(const PipelineConfig& config, const RegionAnnotation& region,
                               const OverlaySpec& overlay, int attempt) {
  njson j;
  j["task"] = "generate";
  j["model"] = config.generator_model;
  j["attempt"] = attempt;
  j["image_id"] = region.image_id;
  j["image_size"] = njson::array({region.image_w, region.image_h});
  j["overlay"] = overlay_to_json(overlay);
  j["phrase"] = region.phrase;
  j["phrase_type"] = region.phrase_type;
  j["prompt"] =
      "The image shows one region outlined in red and its same-type neighbours "
      "labelled with letters. The red region contains: " +
      region.phrase +
      ". Step 1: list at least three attributes clearly present in the red region and "
      "at least three plausible attributes that are absent from it. Step 2: write one "
      "positive caption that truthfully negates an absent attribute and one negative "
      "caption that falsely negates a present attribute; each caption must be a single "
      "sentence containing a negation word. Step 3: re-check both captions and revise "
      "any caption that is missing a negation word or its attribute. Reply with JSON "
      "keys: present, absent, positive_caption, negative_caption, pos_attribute, "
      "neg_attribute.";
  return j;
}

njson build_vqa_request(const PipelineConfig& config, const RegionAnnotation& region,
                        const OverlaySpec& overlay, const std::string& caption,
                        const std::string& slot) {
  njson j;
  j["task"] = "align";
  j["model"] = config.vqa_model;
  j["image_id"] = region.image_id;
  j["overlay"] = overlay_to_json(overlay);
  j["slot"] = slot;
  j["caption"] = caption;
  j["question"] = "Which labelled box aligns with this caption: \"" + caption +
                  "\"? Answer with one letter, or 'target' for the red box, or 'none'.";
  return j;
}

void parse_generation_response(const njson& response, AttributeExtraction& attrs,
                               CaptionPair& pair) {
  if (!response.is_object()) {
    fail(ErrKind::SchemaError, "generator response must be a JSON object");
  }
  auto string_list = [&](const char* key) {
    if (!response.contains(key) || !response[key].is_array()) {
      fail(ErrKind::SchemaError, std::string("generator response needs an array '") + key +
                                     "'");
    }
    std::vector<std::string> out;
    for (const njson& item : response[key]) {
      if (!item.is_string() || item.get<std::string>().empty()) {
        fail(ErrKind::SchemaError,
             std::string("entries of '") + key + "' must be non-empty strings");
      }
      out.push_back(item.get<std::string>());
    }
    if (out.size() < 3) {
      fail(ErrKind::SchemaError, std::string("'") + key + "' needs at least three entries");
    }
    return out;
  };
  attrs.present = string_list("present");
  attrs.absent = string_list("absent");
  pair.c_pos =
      require_string(response, "positive_caption", "generator response", ErrKind::SchemaError);
  pair.c_neg =
      require_string(response, "negative_caption", "generator response", ErrKind::SchemaError);
  pair.pos_attribute =
      require_string(response, "pos_attribute", "generator response", ErrKind::SchemaError);
  pair.neg_attribute =
      require_string(response, "neg_attribute", "generator response", ErrKind::SchemaError);
}

std::string normalize_phrase(const std::string& text) {
  std::string out;
  std::string word;
  auto flush = [&] {
    // Peel ASCII punctuation off both edges.
    std::size_t begin = 0;
    std::size_t end = word.size();
    while (begin < end && std::ispunct(static_cast<unsigned char>(word[begin]))) ++begin;
    while (end > begin && std::ispunct(static_cast<unsigned char>(word[end - 1]))) --end;
    std::string w = word.substr(begin, end - begin);
    word.clear();
    if (w.empty()) return;
    // Light plural strip: "hats" -> "hat", but "glass" keeps its double s.
    if (w.size() > 3 && w.back() == 's' && w[w.size() - 2] != 's') w.pop_back();
    if (!out.empty()) out += ' ';
    out += w;
  };
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else {
      word += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
  }
  flush();
  return out;
}

VerifyResult verify_pair(const CaptionPair& pair, const AttributeExtraction& attrs) {
  VerifyResult result;
  auto references = [](const std::string& caption, const std::vector<std::string>& list) {
    const std::string normalized = normalize_phrase(caption);
    for (const std::string& attr : list) {
      const std::string needle = normalize_phrase(attr);
      if (!needle.empty() && normalized.find(needle) != std::string::npos) return true;
    }
    return false;
  };
  if (!caption_has_cue(pair.c_pos)) result.reasons.push_back("pos-missing-cue");
  if (!references(pair.c_pos, attrs.absent)) result.reasons.push_back("pos-unknown-attribute");
  if (!caption_has_cue(pair.c_neg)) result.reasons.push_back("neg-missing-cue");
  if (!references(pair.c_neg, attrs.present)) {
    result.reasons.push_back("neg-unknown-attribute");
  }
  result.passed = result.reasons.empty();
  return result;
}

GenerationOutcome generate_pair(ModelClient& generator, const PipelineConfig& config,
                                const RegionAnnotation& region,
                                const OverlaySpec& overlay) {
  check_pipeline_config(config);
  std::string last_reason = "no attempt made";
  for (int attempt = 0; attempt <= config.retry_limit; ++attempt) {
    const njson response =
        generator.complete(build_generation_request(config, region, overlay, attempt));
    GenerationOutcome outcome;
    try {
      parse_generation_response(response, outcome.attributes, outcome.pair);
    } catch (const Error& e) {
      if (e.kind() != ErrKind::SchemaError) throw;
      last_reason = e.what();
      continue;
    }
    const VerifyResult check = verify_pair(outcome.pair, outcome.attributes);
    if (!check.passed) {
      last_reason.clear();
      for (const std::string& reason : check.reasons) {
        if (!last_reason.empty()) last_reason += ", ";
        last_reason += reason;
      }
      continue;
    }
    outcome.pair.cues_used = cue_surfaces(outcome.pair.c_pos, outcome.pair.c_neg);
    outcome.retry_count = attempt;
    return outcome;
  }
  fail(ErrKind::RetryExhausted, "generation for image " + region.image_id + " ('" +
                                    region.phrase + "') failed after " +
                                    std::to_string(config.retry_limit + 1) +
                                    " calls; last problem: " + last_reason);
}

AlignmentVerdict align(ModelClient& vqa, const PipelineConfig& config,
                       const RegionAnnotation& region, const OverlaySpec& overlay,
                       const CaptionPair& pair) {
  std::set<std::string> letters;
  for (const OverlayLabel& label : overlay.labels) letters.insert(std::string(1, label.letter));

  auto ask = [&](const std::string& caption, const char* slot) {
    const njson response =
        vqa.complete(build_vqa_request(config, region, overlay, caption, slot));
    if (!response.is_object() || !response.contains("answer") ||
        !response["answer"].is_string()) {
      fail(ErrKind::UnparsableAnswer, "alignment response carries no string 'answer'");
    }
    const std::string answer = response["answer"].get<std::string>();
    if (answer == "target" || answer == "none" || letters.count(answer) > 0) return answer;
    fail(ErrKind::UnparsableAnswer,
         "answer '" + answer + "' is not 'target', 'none', or a visible letter");
  };

  AlignmentVerdict verdict;
  verdict.pos_match = ask(pair.c_pos, "positive");
  verdict.neg_match = ask(pair.c_neg, "negative");
  // Accepted: the positive caption names the target and the negative caption
  // names anything but it ("none" or a lettered sibling).
  verdict.accepted = verdict.pos_match == "target" && verdict.neg_match != "target";
  return verdict;
}

njson counters_to_json(const BuildCounters& counters) {
  return njson{{"images_total", counters.images_total},
               {"images_rejected", counters.images_rejected},
               {"regions_selected", counters.regions_selected},
               {"generation_failures", counters.generation_failures},
               {"unparsable_answers", counters.unparsable_answers},
               {"alignment_rejections", counters.alignment_rejections},
               {"records_emitted", counters.records_emitted}};
}

BuildResult build_dataset(ModelClient& generator, ModelClient& vqa,
                          const std::vector<ImageAnnotation>& annotations,
                          const PipelineConfig& config) {
  check_pipeline_config(config);

  // Process and emit in ascending image_id order so output bytes never depend
  // on annotation file order or thread schedule.
  std::vector<std::size_t> order(annotations.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return annotations[a].image_id < annotations[b].image_id;
  });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (annotations[order[i - 1]].image_id == annotations[order[i]].image_id) {
      fail(ErrKind::FormatError,
           "duplicate image_id " + annotations[order[i]].image_id + " in annotations");
    }
  }

  struct ImageOutcome {
    std::vector<DatasetRecord> records;
    BuildCounters counters;
  };
  std::vector<ImageOutcome> outcomes(order.size());
  std::exception_ptr first_error = nullptr;
  const long count = static_cast<long>(order.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (config.exec == Execution::Parallel)
#endif
  for (long oi = 0; oi < count; ++oi) {
    try {
      const ImageAnnotation& image = annotations[order[static_cast<std::size_t>(oi)]];
      ImageOutcome outcome;
      outcome.counters.images_total = 1;

      std::vector<std::size_t> picks;
      try {
        picks = select_regions(image, region_seed(config.seed, image.image_id),
                               config.max_area_ratio);
      } catch (const Error& e) {
        if (e.kind() != ErrKind::NoEligibleRegions) throw;
        outcome.counters.images_rejected = 1;
        outcomes[static_cast<std::size_t>(oi)] = std::move(outcome);
        continue;
      }

      for (std::size_t region_index : picks) {
        ++outcome.counters.regions_selected;
        const RegionAnnotation& region = image.regions[region_index];
        const OverlaySpec overlay =
            overlay_for_region(image, region_index, config.label_size);

        GenerationOutcome generated;
        try {
          generated = generate_pair(generator, config, region, overlay);
        } catch (const Error& e) {
          if (e.kind() != ErrKind::RetryExhausted) throw;
          ++outcome.counters.generation_failures;
          continue;
        }

        AlignmentVerdict verdict;
        try {
          verdict = align(vqa, config, region, overlay, generated.pair);
        } catch (const Error& e) {
          if (e.kind() != ErrKind::UnparsableAnswer) throw;
          ++outcome.counters.unparsable_answers;
          continue;
        }
        if (!verdict.accepted) {
          ++outcome.counters.alignment_rejections;
          continue;
        }

        DatasetRecord record;
        record.region = region;
        record.attributes = generated.attributes;
        record.pair = generated.pair;
        record.verdict = verdict;
        record.retry_count = generated.retry_count;
        record.split = config.split;
        outcome.records.push_back(std::move(record));
        ++outcome.counters.records_emitted;
      }
      outcomes[static_cast<std::size_t>(oi)] = std::move(outcome);
    } catch (...) {
#ifdef _OPENMP
#pragma omp critical(negkit_pipeline_error)
#endif
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (first_error) std::rethrow_exception(first_error);

  BuildResult result;
  for (ImageOutcome& outcome : outcomes) {
    result.counters.images_total += outcome.counters.images_total;
    result.counters.images_rejected += outcome.counters.images_rejected;
    result.counters.regions_selected += outcome.counters.regions_selected;
    result.counters.generation_failures += outcome.counters.generation_failures;
    result.counters.unparsable_answers += outcome.counters.unparsable_answers;
    result.counters.alignment_rejections += outcome.counters.alignment_rejections;
    result.counters.records_emitted += outcome.counters.records_emitted;
    for (DatasetRecord& record : outcome.records) {
      result.records.push_back(std::move(record));
    }
  }
  return result;
}

njson record_to_json(const DatasetRecord& record) {
  return njson{
      {"image_id", record.region.image_id},
      {"split", record.split},
      {"retry_count", record.retry_count},
      {"region",
       njson{{"box", box_to_json(record.region.box)},
             {"phrase", record.region.phrase},
             {"phrase_type", record.region.phrase_type},
             {"image_size", njson::array({record.region.image_w, record.region.image_h})}}},
      {"attributes",
       njson{{"present", record.attributes.present}, {"absent", record.attributes.absent}}},
      {"captions", njson{{"positive", record.pair.c_pos},
                         {"negative", record.pair.c_neg},
                         {"pos_attribute", record.pair.pos_attribute},
                         {"neg_attribute", record.pair.neg_attribute},
                         {"cues", record.pair.cues_used}}},
      {"verdict", njson{{"pos_match", record.verdict.pos_match},
                        {"neg_match", record.verdict.neg_match},
                        {"accepted", record.verdict.accepted}}}};
}

DatasetRecord record_from_json(const njson& j) {
  if (!j.is_object()) fail(ErrKind::FormatError, "dataset record must be a JSON object");
  auto section = [&](const char* key) -> const njson& {
    if (!j.contains(key) || !j[key].is_object()) {
      fail(ErrKind::FormatError, std::string("record needs an object '") + key + "'");
    }
    return j[key];
  };
  auto string_list = [](const njson& parent, const char* key) {
    if (!parent.contains(key) || !parent[key].is_array()) {
      fail(ErrKind::FormatError, std::string("record needs an array '") + key + "'");
    }
    std::vector<std::string> out;
    for (const njson& item : parent[key]) {
      if (!item.is_string()) {
        fail(ErrKind::FormatError, std::string("'") + key + "' entries must be strings");
      }
      out.push_back(item.get<std::string>());
    }
    return out;
  };

  DatasetRecord record;
  if (!j.contains("image_id")) fail(ErrKind::FormatError, "record missing image_id");
  record.region.image_id = id_from_json(j["image_id"], "image_id");
  record.split = require_string(j, "split", "record", ErrKind::FormatError);
  if (record.split != "S" && record.split != "M" && record.split != "L") {
    fail(ErrKind::FormatError, "record split must be S, M, or L");
  }
  if (!j.contains("retry_count") || !j["retry_count"].is_number_integer() ||
      j["retry_count"].get<int>() < 0) {
    fail(ErrKind::FormatError, "record needs a non-negative integer retry_count");
  }
  record.retry_count = j["retry_count"].get<int>();

  const njson& region = section("region");
  if (!region.contains("box")) fail(ErrKind::FormatError, "region missing 'box'");
  record.region.box = box_from_json(region["box"]);
  record.region.phrase = require_string(region, "phrase", "region", ErrKind::FormatError);
  record.region.phrase_type =
      require_string(region, "phrase_type", "region", ErrKind::FormatError);
  if (!region.contains("image_size") || !region["image_size"].is_array() ||
      region["image_size"].size() != 2 || !region["image_size"][0].is_number() ||
      !region["image_size"][1].is_number()) {
    fail(ErrKind::FormatError, "region needs an [w, h] 'image_size'");
  }
  record.region.image_w = region["image_size"][0].get<double>();
  record.region.image_h = region["image_size"][1].get<double>();
  if (!(record.region.image_w > 0.0) || !(record.region.image_h > 0.0)) {
    fail(ErrKind::FormatError, "image_size must be positive");
  }

  const njson& attrs = section("attributes");
  record.attributes.present = string_list(attrs, "present");
  record.attributes.absent = string_list(attrs, "absent");

  const njson& captions = section("captions");
  record.pair.c_pos = require_string(captions, "positive", "captions", ErrKind::FormatError);
  record.pair.c_neg = require_string(captions, "negative", "captions", ErrKind::FormatError);
  record.pair.pos_attribute =
      require_string(captions, "pos_attribute", "captions", ErrKind::FormatError);
  record.pair.neg_attribute =
      require_string(captions, "neg_attribute", "captions", ErrKind::FormatError);
  record.pair.cues_used = string_list(captions, "cues");

  const njson& verdict = section("verdict");
  record.verdict.pos_match =
      require_string(verdict, "pos_match", "verdict", ErrKind::FormatError);
  record.verdict.neg_match =
      require_string(verdict, "neg_match", "verdict", ErrKind::FormatError);
  if (!verdict.contains("accepted") || !verdict["accepted"].is_boolean()) {
    fail(ErrKind::FormatError, "verdict needs a boolean 'accepted'");
  }
  record.verdict.accepted = verdict["accepted"].get<bool>();
  return record;
}

void write_records_jsonl(const std::string& path,
                         const std::vector<DatasetRecord>& records) {
  std::ofstream out(path);
  if (!out) fail(ErrKind::IoError, "cannot write dataset to " + path);
  for (const DatasetRecord& record : records) out << record_to_json(record).dump() << "\n";
}

std::vector<DatasetRecord> read_records_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrKind::IoError, "cannot open dataset file " + path);
  std::vector<DatasetRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      records.push_back(record_from_json(njson::parse(line)));
    } catch (const njson::exception& e) {
      fail(ErrKind::FormatError,
           path + " line " + std::to_string(line_no) + ": invalid JSON: " + e.what());
    }
  }
  return records;
}

njson dataset_summary(const std::vector<DatasetRecord>& records,
                      const BuildCounters& counters, const std::string& split) {
  std::set<std::string> images;
  for (const DatasetRecord& record : records) images.insert(record.region.image_id);
  njson j;
  j["split"] = split;
  j["records"] = records.size();
  j["captions"] = records.size() * 2;  // each record carries a caption pair
  j["images"] = images.size();
  j["counters"] = counters_to_json(counters);
  // Nominal corpus sizes per split, kept as descriptive metadata.
  j["split_targets"] = njson{{"S", njson{{"images", 8000}, {"captions", 30600}}},
                             {"M", njson{{"images", 16000}, {"captions", 60400}}},
                             {"L", njson{{"images", 24000}, {"captions", 91100}}}};
  return j;
}

namespace {

// Shared top-k ordering for the post-hoc filters: score desc, caption_id asc,
// input order asc.
std::vector<std::size_t> top_k_order(const std::vector<Detection>& dets, int k) {
  std::vector<std::size_t> order(dets.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (dets[a].score != dets[b].score) return dets[a].score > dets[b].score;
    if (dets[a].caption_id != dets[b].caption_id) {
      return dets[a].caption_id < dets[b].caption_id;
    }
    return a < b;
  });
  if (order.size() > static_cast<std::size_t>(k)) {
    order.resize(static_cast<std::size_t>(k));
  }
  return order;
}

}  // namespace

std::vector<Detection> posthoc_crop_verify(ModelClient& client, const std::string& model,
                                           const std::vector<Detection>& dets,
                                           const std::string& query, int k) {
  if (k < 1) fail(ErrKind::MalformedConfig, "k must be >= 1");
  const std::vector<std::size_t> order = top_k_order(dets, k);
  std::vector<Detection> kept;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const Detection& det = dets[order[rank]];
    njson request;
    request["task"] = "crop_verify";
    request["model"] = model;
    request["query"] = query;
    request["image_id"] = det.image_id;
    request["box"] = box_to_json(det.box);
    request["rank"] = rank;
    const njson response = client.complete(request);
    if (!response.is_object() || !response.contains("answer") ||
        !response["answer"].is_string()) {
      fail(ErrKind::UnparsableAnswer, "crop response carries no string 'answer'");
    }
    const std::string answer = response["answer"].get<std::string>();
    if (answer == "yes") {
      kept.push_back(det);
    } else if (answer != "no") {
      fail(ErrKind::UnparsableAnswer, "crop answer must be 'yes' or 'no', got '" + answer +
                                          "'");
    }
  }
  return kept;
}

std::vector<Detection> posthoc_coordinate_prompt(ModelClient& client,
                                                 const std::string& model,
                                                 const std::vector<Detection>& dets,
                                                 const std::string& query, int k) {
  if (k < 1) fail(ErrKind::MalformedConfig, "k must be >= 1");
  const std::vector<std::size_t> order = top_k_order(dets, k);

  njson boxes = njson::array();
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    const Detection& det = dets[order[rank]];
    boxes.push_back(njson{{"index", rank},
                          {"image_id", det.image_id},
                          {"box", box_to_json(det.box)},
                          {"score", det.score}});
  }
  njson request;
  request["task"] = "coordinate_filter";
  request["model"] = model;
  request["query"] = query;
  request["boxes"] = boxes;
  const njson response = client.complete(request);

  if (!response.is_object() || !response.contains("inconsistent") ||
      !response["inconsistent"].is_array()) {
    fail(ErrKind::UnparsableAnswer, "response carries no 'inconsistent' array");
  }
  std::set<std::size_t> flagged;
  for (const njson& item : response["inconsistent"]) {
    if (!item.is_number_integer()) {
      fail(ErrKind::UnparsableAnswer, "'inconsistent' entries must be integers");
    }
    const long long index = item.get<long long>();
    if (index < 0 || static_cast<std::size_t>(index) >= order.size()) {
      fail(ErrKind::UnparsableAnswer,
           "'inconsistent' names unknown box index " + std::to_string(index));
    }
    flagged.insert(static_cast<std::size_t>(index));
  }
  std::vector<Detection> kept;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (flagged.count(rank) == 0) kept.push_back(dets[order[rank]]);
  }
  return kept;
}

}  // namespace negkit
