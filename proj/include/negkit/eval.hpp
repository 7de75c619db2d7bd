#pragma once

// Grounding evaluation over (caption, image) queries.
//
// Protocol, pinned so the independent reference in the test suite can agree
// to 1e-9:
//   * detections are grouped per query (caption); within each image the top
//     `max_dets` by score survive (AR convention), then the query's pool is
//     sorted by score desc, image_id asc, input order asc;
//   * greedy matching walks that order and pairs each detection with the
//     best still-unmatched ground-truth box of the same image at IoU >= t
//     (best IoU, ties to the lower box index);
//   * AP uses 101-point interpolated precision over recall 0.00..1.00 and
//     averages across thresholds 0.50:0.05:0.95 ("coco") or just 0.50
//     ("ap50"), then across queries that own at least one GT box;
//   * AR averages final recall the same way.  Both are reported on a 0-100
//     scale.
//
// The pooled operating-point precision/recall counts every query's capped
// detections at the base IoU threshold with no score cut (a correct box for
// one caption plus the same box under a contradictory caption yields
// precision 0.5, recall 1.0).  FPR is the percentage of empty-GT queries
// that fire at score >= tau; when suppression is enabled it is measured on
// the surviving set.

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "negkit/detections.hpp"
#include "negkit/execution.hpp"
#include "negkit/json.hpp"

namespace negkit {

enum class ApProtocol { Coco, Ap50 };
ApProtocol protocol_from_string(const std::string& name);  // MalformedConfig
const char* to_string(ApProtocol protocol);
std::vector<double> iou_thresholds(ApProtocol protocol);

struct EvalOptions {
  double iou_thresh = 0.5;    // NMS + base matching threshold
  double score_thresh = 0.3;  // FPR firing threshold tau
  ApProtocol protocol = ApProtocol::Coco;
  bool run_nms = true;
  int max_dets_per_image = 100;
  Execution exec = Execution::Parallel;
};

struct QueryResult {
  std::string caption_id;
  std::size_t gt_count = 0;
  std::size_t det_count = 0;  // after the per-image cap
  double ap = 0.0;            // 0-100, threshold-averaged
  double recall = 0.0;        // 0-100, threshold-averaged
};

struct EvalReport {
  double ap = 0.0;
  double ar = 0.0;
  std::optional<double> nms_ap;  // present when suppression ran
  std::optional<double> nms_ar;
  double precision = 0.0;  // pooled operating point, 0-1, raw detections
  double recall = 0.0;
  std::optional<double> fpr;  // absent when the query set has no empty-GT query
  std::vector<QueryResult> per_query;
  // echoed parameters
  double iou_thresh = 0.5;
  double score_thresh = 0.3;
  std::string protocol = "coco";
  bool nms_applied = false;
  int max_dets = 100;
};

// Mean AP / mean recall over queries with >= 1 GT box (0-100 scale); both
// throw NoPositiveQueries when no query owns a GT box.
double average_precision(const std::vector<Detection>& dets, const QuerySet& qs,
                         const EvalOptions& opts);
double average_recall(const std::vector<Detection>& dets, const QuerySet& qs,
                      const EvalOptions& opts);

// (precision, recall) at the operating point described above.
std::pair<double, double> pooled_precision_recall(const std::vector<Detection>& dets,
                                                  const QuerySet& qs,
                                                  const EvalOptions& opts);

// Percentage of empty-GT queries with at least one detection at score >=
// tau; throws NoNegativeQueries when every query has ground truth.
double fpr(const std::vector<Detection>& dets, const QuerySet& qs, double tau);

// Full report: raw AP/AR + pooled operating point, then (optionally) the
// suppressed set's AP/AR and the FPR on whichever set applies.
EvalReport evaluate(const std::vector<Detection>& dets, const QuerySet& qs,
                    const EvalOptions& opts);

// Multiple-choice answer: index of the highest score, first index on ties.
// Throws EmptyCandidates for fewer than two options, NonFiniteInput on
// NaN/Inf entries.
std::size_t mcq_select(const std::vector<double>& scores);

njson report_to_json(const EvalReport& report);
std::string report_table(const EvalReport& report);  // aligned text, no color

}  // namespace negkit
