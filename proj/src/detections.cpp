#include "negkit/detections.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "negkit/errors.hpp"

namespace negkit {

// Accepts a JSON string or number and yields the id as text.
std::string id_from_json(const njson& v, const char* what) {
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s.empty()) fail(ErrKind::FormatError, std::string(what) + " must not be empty");
    return s;
  }
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_number_unsigned()) return std::to_string(v.get<unsigned long long>());
  fail(ErrKind::FormatError, std::string(what) + " must be a string or integer");
}

std::map<std::string, std::vector<Box>> QuerySet::gt_for(const std::string& caption_id) const {
  std::map<std::string, std::vector<Box>> out;
  for (const GroundTruthEntry& entry : ground_truth) {
    if (entry.caption_id != caption_id || entry.boxes.empty()) continue;
    auto& slot = out[entry.image_id];
    slot.insert(slot.end(), entry.boxes.begin(), entry.boxes.end());
  }
  return out;
}

std::size_t QuerySet::total_gt(const std::string& caption_id) const {
  std::size_t n = 0;
  for (const GroundTruthEntry& entry : ground_truth) {
    if (entry.caption_id == caption_id) n += entry.boxes.size();
  }
  return n;
}

bool QuerySet::has_query(const std::string& caption_id) const {
  for (const Query& q : queries) {
    if (q.caption_id == caption_id) return true;
  }
  return false;
}

njson detection_to_json(const Detection& det) {
  njson j;
  j["image_id"] = det.image_id;
  j["caption_id"] = det.caption_id;
  j["box"] = box_to_json(det.box);
  j["score"] = det.score;
  return j;
}

Detection detection_from_json(const njson& j) {
  if (!j.is_object()) fail(ErrKind::FormatError, "detection must be an object");
  for (const char* key : {"image_id", "caption_id", "box", "score"}) {
    if (!j.contains(key)) {
      fail(ErrKind::FormatError, std::string("detection missing key: ") + key);
    }
  }
  Detection det;
  det.image_id = id_from_json(j.at("image_id"), "image_id");
  det.caption_id = id_from_json(j.at("caption_id"), "caption_id");
  det.box = box_from_json(j.at("box"));
  if (!j.at("score").is_number()) fail(ErrKind::FormatError, "score must be a number");
  det.score = j.at("score").get<double>();
  if (!std::isfinite(det.score) || det.score < 0.0 || det.score > 1.0) {
    fail(ErrKind::FormatError, "score must lie in [0, 1]");
  }
  return det;
}

std::vector<Detection> read_detections_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrKind::IoError, "cannot open detections file: " + path);
  std::vector<Detection> dets;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      dets.push_back(detection_from_json(njson::parse(line)));
    } catch (const njson::exception& e) {
      fail(ErrKind::FormatError,
           path + ":" + std::to_string(lineno) + ": bad JSON: " + e.what());
    } catch (const Error& e) {
      fail(e.kind(), path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return dets;
}

void write_detections_jsonl(std::ostream& out, const std::vector<Detection>& dets) {
  for (const Detection& det : dets) out << detection_to_json(det).dump() << "\n";
}

void write_detections_jsonl(const std::string& path, const std::vector<Detection>& dets) {
  std::ofstream out(path);
  if (!out) fail(ErrKind::IoError, "cannot create detections file: " + path);
  write_detections_jsonl(out, dets);
}

QuerySet query_set_from_json(const njson& j) {
  if (!j.is_object() || !j.contains("queries") || !j.contains("ground_truth")) {
    fail(ErrKind::FormatError, "query set needs {queries, ground_truth}");
  }
  QuerySet qs;
  std::set<std::string> ids;
  for (const njson& q : j.at("queries")) {
    Query query;
    query.caption_id = id_from_json(q.at("caption_id"), "caption_id");
    if (!q.contains("text") || !q.at("text").is_string()) {
      fail(ErrKind::FormatError, "query missing text");
    }
    query.text = q.at("text").get<std::string>();
    const std::string pol = q.at("polarity").get<std::string>();
    if (pol == "positive") {
      query.polarity = Polarity::Positive;
    } else if (pol == "negative") {
      query.polarity = Polarity::Negative;
    } else {
      fail(ErrKind::FormatError, "polarity must be 'positive' or 'negative'");
    }
    if (q.contains("contradicts") && !q.at("contradicts").is_null()) {
      query.contradicts = id_from_json(q.at("contradicts"), "contradicts");
    }
    if (!ids.insert(query.caption_id).second) {
      fail(ErrKind::FormatError, "duplicate caption_id: " + query.caption_id);
    }
    qs.queries.push_back(std::move(query));
  }
  if (qs.queries.empty()) fail(ErrKind::FormatError, "query set has no queries");

  // contradicts must point at an existing query and be symmetric.
  for (const Query& q : qs.queries) {
    if (!q.contradicts) continue;
    const Query* other = nullptr;
    for (const Query& cand : qs.queries) {
      if (cand.caption_id == *q.contradicts) other = &cand;
    }
    if (!other) {
      fail(ErrKind::FormatError, "contradicts references unknown caption_id: " + *q.contradicts);
    }
    if (!other->contradicts || *other->contradicts != q.caption_id) {
      fail(ErrKind::FormatError,
           "contradicts must be symmetric between " + q.caption_id + " and " + other->caption_id);
    }
  }

  for (const njson& g : j.at("ground_truth")) {
    GroundTruthEntry entry;
    entry.image_id = id_from_json(g.at("image_id"), "image_id");
    entry.caption_id = id_from_json(g.at("caption_id"), "caption_id");
    if (!ids.count(entry.caption_id)) {
      fail(ErrKind::FormatError, "ground truth references unknown caption_id: " + entry.caption_id);
    }
    if (!g.contains("boxes") || !g.at("boxes").is_array()) {
      fail(ErrKind::FormatError, "ground truth entry needs a boxes array");
    }
    for (const njson& b : g.at("boxes")) entry.boxes.push_back(box_from_json(b));
    qs.ground_truth.push_back(std::move(entry));
  }
  return qs;
}

QuerySet read_query_set(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrKind::IoError, "cannot open query set: " + path);
  njson j;
  try {
    in >> j;
  } catch (const njson::exception& e) {
    fail(ErrKind::FormatError, path + ": bad JSON: " + e.what());
  }
  return query_set_from_json(j);
}

void validate_detections(const std::vector<Detection>& dets, const QuerySet& qs) {
  for (const Detection& det : dets) {
    if (!qs.has_query(det.caption_id)) {
      fail(ErrKind::FormatError,
           "detection references caption_id absent from the query set: " + det.caption_id);
    }
  }
}

}  // namespace negkit
