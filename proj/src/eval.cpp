#include "negkit/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <numeric>
#include <set>
#include <sstream>

#include "negkit/errors.hpp"
#include "negkit/nms.hpp"

namespace negkit {

namespace {

void check_options(const EvalOptions& opts) {
  if (!std::isfinite(opts.iou_thresh) || opts.iou_thresh <= 0.0 || opts.iou_thresh >= 1.0) {
    fail(ErrKind::MalformedConfig, "iou threshold must lie in (0, 1)");
  }
  if (!std::isfinite(opts.score_thresh) || opts.score_thresh < 0.0 ||
      opts.score_thresh > 1.0) {
    fail(ErrKind::MalformedConfig, "score threshold must lie in [0, 1]");
  }
  if (opts.max_dets_per_image < 1) {
    fail(ErrKind::MalformedConfig, "per-image detection cap must be >= 1");
  }
}

struct IndexedDet {
  const Detection* det;
  std::size_t input_pos;
};

// The query's detection pool after the per-image cap, sorted by score desc,
// image_id asc, input order asc.
std::vector<IndexedDet> capped_query_dets(const std::vector<Detection>& dets,
                                          const std::string& caption_id, int max_dets) {
  std::vector<IndexedDet> pool;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    if (dets[i].caption_id == caption_id) pool.push_back({&dets[i], i});
  }

  // Per-image cap by score (ties keep earlier input).
  std::vector<std::string> images;
  for (const IndexedDet& d : pool) {
    if (std::find(images.begin(), images.end(), d.det->image_id) == images.end()) {
      images.push_back(d.det->image_id);
    }
  }
  std::vector<IndexedDet> capped;
  for (const std::string& image : images) {
    std::vector<IndexedDet> group;
    for (const IndexedDet& d : pool) {
      if (d.det->image_id == image) group.push_back(d);
    }
    std::stable_sort(group.begin(), group.end(), [](const IndexedDet& a, const IndexedDet& b) {
      if (a.det->score != b.det->score) return a.det->score > b.det->score;
      return a.input_pos < b.input_pos;
    });
    if (group.size() > static_cast<std::size_t>(max_dets)) {
      group.resize(static_cast<std::size_t>(max_dets));
    }
    capped.insert(capped.end(), group.begin(), group.end());
  }

  std::stable_sort(capped.begin(), capped.end(), [](const IndexedDet& a, const IndexedDet& b) {
    if (a.det->score != b.det->score) return a.det->score > b.det->score;
    if (a.det->image_id != b.det->image_id) return a.det->image_id < b.det->image_id;
    return a.input_pos < b.input_pos;
  });
  return capped;
}

// Greedy matching at one threshold; returns per-detection hit flags.
std::vector<bool> match_at(const std::vector<IndexedDet>& pool,
                           const std::map<std::string, std::vector<Box>>& gt, double t) {
  std::map<std::string, std::vector<bool>> taken;
  for (const auto& [image, boxes] : gt) taken[image].assign(boxes.size(), false);

  std::vector<bool> hits(pool.size(), false);
  for (std::size_t k = 0; k < pool.size(); ++k) {
    const auto it = gt.find(pool[k].det->image_id);
    if (it == gt.end()) continue;
    const std::vector<Box>& boxes = it->second;
    std::vector<bool>& used = taken[pool[k].det->image_id];
    double best = -1.0;
    std::size_t best_idx = boxes.size();
    for (std::size_t b = 0; b < boxes.size(); ++b) {
      if (used[b]) continue;
      const double overlap = iou(pool[k].det->box, boxes[b]);
      if (overlap >= t && overlap > best) {
        best = overlap;
        best_idx = b;
      }
    }
    if (best_idx < boxes.size()) {
      used[best_idx] = true;
      hits[k] = true;
    }
  }
  return hits;
}

// 101-point interpolated AP from greedy hit flags.
double interpolated_ap(const std::vector<bool>& hits, std::size_t total_gt) {
  std::vector<double> precision(hits.size());
  std::vector<double> recall(hits.size());
  std::size_t tp = 0;
  for (std::size_t k = 0; k < hits.size(); ++k) {
    if (hits[k]) ++tp;
    precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
    recall[k] = static_cast<double>(tp) / static_cast<double>(total_gt);
  }
  // Envelope from the right, then sample recall = 0.00, 0.01, ..., 1.00.
  for (std::size_t k = precision.size(); k-- > 1;) {
    precision[k - 1] = std::max(precision[k - 1], precision[k]);
  }
  double total = 0.0;
  for (int j = 0; j <= 100; ++j) {
    const double want = static_cast<double>(j) / 100.0;
    double value = 0.0;
    for (std::size_t k = 0; k < recall.size(); ++k) {
      if (recall[k] >= want) {
        value = precision[k];
        break;
      }
    }
    total += value;
  }
  return total / 101.0;
}

struct QueryStat {
  std::string caption_id;
  bool positive = false;        // owns >= 1 GT box
  std::size_t gt_count = 0;
  std::size_t det_count = 0;    // capped pool size
  double ap = 0.0;              // threshold-averaged, 0-1
  double recall = 0.0;          // threshold-averaged, 0-1
  std::size_t base_tp = 0;      // hits at the base threshold
};

std::vector<QueryStat> per_query_stats(const std::vector<Detection>& dets,
                                       const QuerySet& qs, const EvalOptions& opts) {
  const std::vector<double> thresholds = iou_thresholds(opts.protocol);
  std::vector<QueryStat> stats(qs.queries.size());
  std::exception_ptr first_error = nullptr;
  const long count = static_cast<long>(qs.queries.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (opts.exec == Execution::Parallel)
#endif
  for (long qi = 0; qi < count; ++qi) {
    try {
      const auto idx = static_cast<std::size_t>(qi);
      const std::string& caption_id = qs.queries[idx].caption_id;
      QueryStat stat;
      stat.caption_id = caption_id;
      const auto gt = qs.gt_for(caption_id);
      for (const auto& [image, boxes] : gt) stat.gt_count += boxes.size();
      const auto pool = capped_query_dets(dets, caption_id, opts.max_dets_per_image);
      stat.det_count = pool.size();
      stat.positive = stat.gt_count > 0;

      const std::vector<bool> base_hits = match_at(pool, gt, opts.iou_thresh);
      stat.base_tp = static_cast<std::size_t>(
          std::count(base_hits.begin(), base_hits.end(), true));

      if (stat.positive) {
        double ap_sum = 0.0;
        double recall_sum = 0.0;
        for (double t : thresholds) {
          const std::vector<bool> hits = match_at(pool, gt, t);
          ap_sum += interpolated_ap(hits, stat.gt_count);
          const auto tp = static_cast<double>(std::count(hits.begin(), hits.end(), true));
          recall_sum += tp / static_cast<double>(stat.gt_count);
        }
        stat.ap = ap_sum / static_cast<double>(thresholds.size());
        stat.recall = recall_sum / static_cast<double>(thresholds.size());
      }
      stats[idx] = std::move(stat);
    } catch (...) {
#ifdef _OPENMP
#pragma omp critical(negkit_eval_error)
#endif
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (first_error) std::rethrow_exception(first_error);
  return stats;
}

double mean_over_positive(const std::vector<QueryStat>& stats, double QueryStat::* field) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const QueryStat& stat : stats) {
    if (!stat.positive) continue;
    sum += stat.*field;
    ++n;
  }
  if (n == 0) fail(ErrKind::NoPositiveQueries, "no query owns a ground-truth box");
  return 100.0 * sum / static_cast<double>(n);
}

}  // namespace

ApProtocol protocol_from_string(const std::string& name) {
  if (name == "coco") return ApProtocol::Coco;
  if (name == "ap50") return ApProtocol::Ap50;
  fail(ErrKind::MalformedConfig, "protocol must be 'coco' or 'ap50'");
}

const char* to_string(ApProtocol protocol) {
  return protocol == ApProtocol::Coco ? "coco" : "ap50";
}

std::vector<double> iou_thresholds(ApProtocol protocol) {
  if (protocol == ApProtocol::Ap50) return {0.5};
  std::vector<double> ts;
  for (int i = 0; i < 10; ++i) ts.push_back(0.50 + 0.05 * static_cast<double>(i));
  return ts;
}

double average_precision(const std::vector<Detection>& dets, const QuerySet& qs,
                         const EvalOptions& opts) {
  check_options(opts);
  validate_detections(dets, qs);
  return mean_over_positive(per_query_stats(dets, qs, opts), &QueryStat::ap);
}

double average_recall(const std::vector<Detection>& dets, const QuerySet& qs,
                      const EvalOptions& opts) {
  check_options(opts);
  validate_detections(dets, qs);
  return mean_over_positive(per_query_stats(dets, qs, opts), &QueryStat::recall);
}

std::pair<double, double> pooled_precision_recall(const std::vector<Detection>& dets,
                                                  const QuerySet& qs,
                                                  const EvalOptions& opts) {
  check_options(opts);
  validate_detections(dets, qs);
  const std::vector<QueryStat> stats = per_query_stats(dets, qs, opts);
  std::size_t tp = 0;
  std::size_t det_total = 0;
  std::size_t gt_total = 0;
  for (const QueryStat& stat : stats) {
    tp += stat.base_tp;
    det_total += stat.det_count;
    gt_total += stat.gt_count;
  }
  const double precision =
      det_total == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(det_total);
  const double recall =
      gt_total == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(gt_total);
  return {precision, recall};
}

double fpr(const std::vector<Detection>& dets, const QuerySet& qs, double tau) {
  if (!std::isfinite(tau) || tau < 0.0 || tau > 1.0) {
    fail(ErrKind::MalformedConfig, "tau must lie in [0, 1]");
  }
  validate_detections(dets, qs);
  std::size_t negatives = 0;
  std::size_t fired = 0;
  for (const Query& q : qs.queries) {
    if (qs.total_gt(q.caption_id) > 0) continue;
    ++negatives;
    for (const Detection& det : dets) {
      if (det.caption_id == q.caption_id && det.score >= tau) {
        ++fired;
        break;
      }
    }
  }
  if (negatives == 0) fail(ErrKind::NoNegativeQueries, "every query owns ground truth");
  return 100.0 * static_cast<double>(fired) / static_cast<double>(negatives);
}

EvalReport evaluate(const std::vector<Detection>& dets, const QuerySet& qs,
                    const EvalOptions& opts) {
  check_options(opts);
  validate_detections(dets, qs);

  EvalReport report;
  report.iou_thresh = opts.iou_thresh;
  report.score_thresh = opts.score_thresh;
  report.protocol = to_string(opts.protocol);
  report.nms_applied = opts.run_nms;
  report.max_dets = opts.max_dets_per_image;

  const std::vector<QueryStat> stats = per_query_stats(dets, qs, opts);
  report.ap = mean_over_positive(stats, &QueryStat::ap);
  report.ar = mean_over_positive(stats, &QueryStat::recall);
  for (const QueryStat& stat : stats) {
    if (!stat.positive) continue;
    QueryResult qr;
    qr.caption_id = stat.caption_id;
    qr.gt_count = stat.gt_count;
    qr.det_count = stat.det_count;
    qr.ap = 100.0 * stat.ap;
    qr.recall = 100.0 * stat.recall;
    report.per_query.push_back(std::move(qr));
  }

  {
    std::size_t tp = 0;
    std::size_t det_total = 0;
    std::size_t gt_total = 0;
    for (const QueryStat& stat : stats) {
      tp += stat.base_tp;
      det_total += stat.det_count;
      gt_total += stat.gt_count;
    }
    report.precision =
        det_total == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(det_total);
    report.recall =
        gt_total == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(gt_total);
  }

  const std::vector<Detection>* fpr_set = &dets;
  std::vector<Detection> survivors;
  if (opts.run_nms) {
    survivors = nms_batch(dets, opts.iou_thresh, opts.exec);
    const std::vector<QueryStat> nms_stats = per_query_stats(survivors, qs, opts);
    report.nms_ap = mean_over_positive(nms_stats, &QueryStat::ap);
    report.nms_ar = mean_over_positive(nms_stats, &QueryStat::recall);
    fpr_set = &survivors;
  }

  bool any_negative = false;
  for (const Query& q : qs.queries) {
    if (qs.total_gt(q.caption_id) == 0) any_negative = true;
  }
  if (any_negative) report.fpr = fpr(*fpr_set, qs, opts.score_thresh);
  return report;
}

std::size_t mcq_select(const std::vector<double>& scores) {
  if (scores.size() < 2) fail(ErrKind::EmptyCandidates, "need at least two candidates");
  for (double s : scores) {
    if (!std::isfinite(s)) fail(ErrKind::NonFiniteInput, "candidate score is NaN/Inf");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

njson report_to_json(const EvalReport& report) {
  njson j;
  j["ap"] = report.ap;
  j["ar"] = report.ar;
  j["nms_ap"] = report.nms_ap ? njson(*report.nms_ap) : njson(nullptr);
  j["nms_ar"] = report.nms_ar ? njson(*report.nms_ar) : njson(nullptr);
  j["precision"] = report.precision;
  j["recall"] = report.recall;
  j["fpr"] = report.fpr ? njson(*report.fpr) : njson(nullptr);
  njson per_query = njson::array();
  for (const QueryResult& qr : report.per_query) {
    per_query.push_back(njson{{"caption_id", qr.caption_id},
                              {"gt_count", qr.gt_count},
                              {"det_count", qr.det_count},
                              {"ap", qr.ap},
                              {"recall", qr.recall}});
  }
  j["per_query"] = per_query;
  j["params"] = njson{{"iou_thresh", report.iou_thresh},
                      {"score_thresh", report.score_thresh},
                      {"protocol", report.protocol},
                      {"nms", report.nms_applied},
                      {"max_dets", report.max_dets}};
  return j;
}

std::string report_table(const EvalReport& report) {
  std::ostringstream out;
  char line[128];
  auto opt = [](const std::optional<double>& v) { return v ? *v : 0.0; };
  std::snprintf(line, sizeof(line), "%-12s %8s %8s %8s %8s %8s\n", "metric", "ap", "ar",
                "nms_ap", "nms_ar", "fpr");
  out << line;
  std::snprintf(line, sizeof(line), "%-12s %8.3f %8.3f %8.3f %8.3f %8.3f\n", "overall",
                report.ap, report.ar, opt(report.nms_ap), opt(report.nms_ar),
                opt(report.fpr));
  out << line;
  out << "\n";
  std::snprintf(line, sizeof(line), "%-16s %6s %6s %8s %8s\n", "query", "gt", "dets", "ap",
                "recall");
  out << line;
  for (const QueryResult& qr : report.per_query) {
    std::snprintf(line, sizeof(line), "%-16s %6zu %6zu %8.3f %8.3f\n",
                  qr.caption_id.c_str(), qr.gt_count, qr.det_count, qr.ap, qr.recall);
    out << line;
  }
  return out.str();
}

}  // namespace negkit
