#pragma once

// Detection records, query sets, and their serialized forms.
//
//   detections - JSONL, one per line:
//     {"image_id", "caption_id", "box": [x1,y1,x2,y2], "score"}
//   query set  - one JSON document:
//     {"queries": [{"caption_id", "text", "polarity", "contradicts"?}],
//      "ground_truth": [{"image_id", "caption_id", "boxes": [[...], ...]}]}
//
// Identifiers are strings throughout; numeric ids in input files are
// canonicalized to their decimal spelling, and every ordering over ids is
// plain lexicographic, so results are reproducible regardless of id style.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "negkit/geometry.hpp"
#include "negkit/json.hpp"

namespace negkit {

struct Detection {
  std::string image_id;
  std::string caption_id;
  Box box;
  double score = 0.0;  // must land in [0, 1]
};

enum class Polarity { Positive, Negative };

struct Query {
  std::string caption_id;
  std::string text;
  Polarity polarity = Polarity::Positive;
  std::optional<std::string> contradicts;  // caption_id of the paired query
};

struct GroundTruthEntry {
  std::string image_id;
  std::string caption_id;
  std::vector<Box> boxes;  // may be empty
};

struct QuerySet {
  std::vector<Query> queries;
  std::vector<GroundTruthEntry> ground_truth;

  // image_id -> boxes for one caption (entries with no boxes are dropped).
  std::map<std::string, std::vector<Box>> gt_for(const std::string& caption_id) const;
  std::size_t total_gt(const std::string& caption_id) const;
  bool has_query(const std::string& caption_id) const;
};

// Accepts a JSON string or non-negative integer and yields the id as text
// (integers are canonicalized to their decimal form).  FormatError otherwise.
std::string id_from_json(const njson& v, const char* what);

std::vector<Detection> read_detections_jsonl(const std::string& path);
void write_detections_jsonl(std::ostream& out, const std::vector<Detection>& dets);
void write_detections_jsonl(const std::string& path, const std::vector<Detection>& dets);
njson detection_to_json(const Detection& det);
Detection detection_from_json(const njson& j);

// Validates polarity values, unique caption ids, symmetric `contradicts`
// links, and box sanity; throws FormatError on violations.
QuerySet read_query_set(const std::string& path);
QuerySet query_set_from_json(const njson& j);

// Every detection must reference a caption_id defined in the query set.
void validate_detections(const std::vector<Detection>& dets, const QuerySet& qs);

}  // namespace negkit
