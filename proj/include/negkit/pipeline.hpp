#pragma once

// Contrastive-caption dataset construction.
//
// For every annotated image the pipeline: (1) samples up to two target regions
// uniformly from the eligible boxes, (2) builds the letter overlay for each
// target, (3) asks a generator model for present/absent attribute lists plus a
// caption pair — a positive caption that truthfully negates an absent
// attribute and a negative caption that falsely negates a present one — with
// local verification and a bounded retry loop, (4) asks a VQA model which
// labelled box each caption aligns with (exactly two calls per pair), and
// (5) emits only accepted records.
//
// Eligibility: a box whose area exceeds max_area_ratio of the image area is
// skipped; an image is rejected outright when any phrase_type occurs more
// than five times.
//
// Determinism: each image derives its own RNG stream from
// region_seed(base_seed, image_id), so results do not depend on annotation
// file order or thread schedule; records are emitted grouped by image in
// ascending image_id order.  With a fixture-backed mock client the whole
// build is byte-reproducible.
//
// Error policy inside build_dataset: RetryExhausted (generation) and
// UnparsableAnswer (alignment) discard the region and bump a counter;
// ClientError is a transport fault and propagates.

#include <cstdint>
#include <string>
#include <vector>

#include "negkit/client.hpp"
#include "negkit/detections.hpp"
#include "negkit/execution.hpp"
#include "negkit/geometry.hpp"
#include "negkit/json.hpp"
#include "negkit/overlay.hpp"

namespace negkit {

struct RegionAnnotation {
  std::string image_id;
  double image_w = 0.0;
  double image_h = 0.0;
  Box box;
  std::string phrase;       // non-empty
  std::string phrase_type;  // category tag, e.g. "person"
};

struct ImageAnnotation {
  std::string image_id;
  double width = 0.0;
  double height = 0.0;
  std::vector<RegionAnnotation> regions;
};

struct AttributeExtraction {
  std::vector<std::string> present;  // >= 3 entries once accepted
  std::vector<std::string> absent;   // >= 3 entries once accepted
};

struct CaptionPair {
  std::string c_pos;          // truthfully negates an absent attribute
  std::string c_neg;          // falsely negates a present attribute
  std::string pos_attribute;  // drawn from the absent list
  std::string neg_attribute;  // drawn from the present list
  std::vector<std::string> cues_used;  // distinct cue surfaces, sorted
};

struct AlignmentVerdict {
  std::string pos_match;  // "target", "none", or a single letter "A".."Z"
  std::string neg_match;
  bool accepted = false;  // pos_match == "target" and neg_match != "target"
};

struct DatasetRecord {
  RegionAnnotation region;
  AttributeExtraction attributes;
  CaptionPair pair;
  AlignmentVerdict verdict;
  int retry_count = 0;
  std::string split = "S";
};

struct PipelineConfig {
  std::string split = "S";  // S, M, or L
  std::uint64_t seed = 0;
  int retry_limit = 3;
  double max_area_ratio = 0.85;
  double label_size = 20.0;
  std::string generator_model = "caption-gen-v1";
  std::string vqa_model = "vqa-align-v1";
  Execution exec = Execution::Parallel;
};

// --- annotation input ------------------------------------------------------

// JSONL, one image per line: {"image_id", "width", "height",
// "regions": [{"box": [x1,y1,x2,y2], "phrase", "phrase_type"}]}.
// Boxes must sit inside the image (BoxOutOfBounds); phrases and types must be
// non-empty; duplicate image ids are rejected (FormatError).
std::vector<ImageAnnotation> read_annotations_jsonl(const std::string& path);

// --- region selection ------------------------------------------------------

// Per-image RNG stream: mixes the base seed with the image id so draws are
// independent of file order and thread schedule.
std::uint64_t region_seed(std::uint64_t base_seed, const std::string& image_id);

// Indices (into image.regions, in draw order) of up to two regions sampled
// uniformly without replacement from the eligible boxes.  Throws
// NoEligibleRegions when the image has no eligible box or any phrase_type
// occurs more than five times.
std::vector<std::size_t> select_regions(const ImageAnnotation& image, std::uint64_t seed,
                                        double max_area_ratio);

// Overlay for one selected region: siblings are the image's other regions
// sharing its phrase_type.
OverlaySpec overlay_for_region(const ImageAnnotation& image, std::size_t region_index,
                               double label_size);

// --- model requests (public so tests can precompute fixture hashes) --------

njson build_generation_request(const PipelineConfig& config, const RegionAnnotation& region,
                               const OverlaySpec& overlay, int attempt);

// slot is "positive" or "negative"; one VQA request per caption.
njson build_vqa_request(const PipelineConfig& config, const RegionAnnotation& region,
                        const OverlaySpec& overlay, const std::string& caption,
                        const std::string& slot);

// Parses a generator response {"present", "absent", "positive_caption",
// "negative_caption", "pos_attribute", "neg_attribute"}; attribute lists need
// >= 3 non-empty entries.  Violations -> SchemaError.
void parse_generation_response(const njson& response, AttributeExtraction& attrs,
                               CaptionPair& pair);

// --- local caption verification -------------------------------------------

struct VerifyResult {
  bool passed = false;
  std::vector<std::string> reasons;  // pos-missing-cue, neg-missing-cue,
                                     // pos-unknown-attribute, neg-unknown-attribute
};

// Lowercases, peels ASCII punctuation off word edges, drops a trailing plural
// "s" from words longer than three letters (unless they end in "ss"), and
// rejoins with single spaces.  Both captions and attributes go through this
// before the substring test, so "Hats." matches attribute "hat".
std::string normalize_phrase(const std::string& text);

// Passes iff the positive caption carries a negation cue and references some
// absent attribute, and the negative caption carries a cue and references
// some present attribute (normalized substring match).
VerifyResult verify_pair(const CaptionPair& pair, const AttributeExtraction& attrs);

// --- generation and alignment ---------------------------------------------

struct GenerationOutcome {
  AttributeExtraction attributes;
  CaptionPair pair;
  int retry_count = 0;  // attempts beyond the first
};

// Calls the generator up to 1 + retry_limit times; a schema violation or a
// verify_pair failure triggers a retry (the attempt number is part of the
// request, so a mock can script different responses per attempt).  Exhausting
// the budget -> RetryExhausted; transport faults -> ClientError.
GenerationOutcome generate_pair(ModelClient& generator, const PipelineConfig& config,
                                const RegionAnnotation& region, const OverlaySpec& overlay);

// Exactly two VQA calls (positive slot then negative slot).  Answers outside
// {"target", "none", letters present in the overlay} -> UnparsableAnswer.
AlignmentVerdict align(ModelClient& vqa, const PipelineConfig& config,
                       const RegionAnnotation& region, const OverlaySpec& overlay,
                       const CaptionPair& pair);

// --- full build ------------------------------------------------------------

struct BuildCounters {
  std::size_t images_total = 0;
  std::size_t images_rejected = 0;     // NoEligibleRegions
  std::size_t regions_selected = 0;
  std::size_t generation_failures = 0; // RetryExhausted
  std::size_t unparsable_answers = 0;  // UnparsableAnswer during alignment
  std::size_t alignment_rejections = 0;
  std::size_t records_emitted = 0;
};

njson counters_to_json(const BuildCounters& counters);

struct BuildResult {
  std::vector<DatasetRecord> records;
  BuildCounters counters;
};

BuildResult build_dataset(ModelClient& generator, ModelClient& vqa,
                          const std::vector<ImageAnnotation>& annotations,
                          const PipelineConfig& config);

// --- record IO and summaries ----------------------------------------------

njson record_to_json(const DatasetRecord& record);
DatasetRecord record_from_json(const njson& j);
void write_records_jsonl(const std::string& path, const std::vector<DatasetRecord>& records);
std::vector<DatasetRecord> read_records_jsonl(const std::string& path);

// Emitted-record counts plus the configured split's nominal image/caption
// targets (S=8000/30600, M=16000/60400, L=24000/91100) as metadata.
njson dataset_summary(const std::vector<DatasetRecord>& records,
                      const BuildCounters& counters, const std::string& split);

// --- post-hoc detection filters -------------------------------------------

// Crop mode: asks one yes/no question per top-k box (min(k, n) client calls,
// ordered by score desc / caption_id / input order) and keeps the boxes
// answered "yes", highest score first.
std::vector<Detection> posthoc_crop_verify(ModelClient& client, const std::string& model,
                                           const std::vector<Detection>& dets,
                                           const std::string& query, int k);

// Coordinate mode: a single call listing every top-k box; the response
// {"inconsistent": [indices]} names boxes to drop.  Out-of-range indices ->
// UnparsableAnswer.
std::vector<Detection> posthoc_coordinate_prompt(ModelClient& client,
                                                 const std::string& model,
                                                 const std::vector<Detection>& dets,
                                                 const std::string& query, int k);

}  // namespace negkit
