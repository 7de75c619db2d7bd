#include "oracles.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>

#include "negkit/lexicon.hpp"

namespace oracle {

using negkit::Box;
using negkit::Detection;
using negkit::Matrix;
using negkit::ParsedCaption;
using negkit::QuerySet;
using negkit::WordTag;

// --- text ------------------------------------------------------------------

namespace {

bool is_modifier(WordTag t) {
  return t == WordTag::Det || t == WordTag::Adp || t == WordTag::Adj;
}

// Length and negation of the phrase starting at `at`, per the pinned grammar.
std::size_t phrase_length(const std::vector<WordTag>& tags, std::size_t at) {
  const std::size_t n = tags.size();
  const WordTag t = tags[at];

  if (t == WordTag::Neg) {
    std::size_t p = at + 1;
    while (p < n && is_modifier(tags[p])) ++p;
    if (p < n && tags[p] == WordTag::Noun) {
      std::size_t q = p;
      while (q < n && tags[q] == WordTag::Noun) ++q;
      return q - at;
    }
    if (p < n && tags[p] == WordTag::Verb) return p - at + 1;
    if (p > at + 1 && tags[p - 1] == WordTag::Adj) return p - at;
    return 1;
  }
  if (t == WordTag::Det || t == WordTag::Adj || t == WordTag::Noun) {
    std::size_t p = at;
    if (tags[p] == WordTag::Det) ++p;
    while (p < n && tags[p] == WordTag::Adj) ++p;
    std::size_t q = p;
    while (q < n && tags[q] == WordTag::Noun) ++q;
    return q > p ? q - at : 1;
  }
  if (t == WordTag::Verb) {
    std::size_t q = at;
    while (q < n && tags[q] == WordTag::Verb) ++q;
    return q - at;
  }
  return 1;
}

}  // namespace

std::vector<RefPhrase> ref_chunk(const std::vector<WordTag>& tags,
                                 const std::vector<bool>& cue) {
  std::vector<RefPhrase> phrases;
  std::size_t at = 0;
  while (at < tags.size()) {
    const std::size_t len = phrase_length(tags, at);
    RefPhrase phrase;
    for (std::size_t i = at; i < at + len; ++i) {
      phrase.indices.push_back(i);
      if (i < cue.size() && cue[i]) phrase.negated = true;
    }
    phrases.push_back(std::move(phrase));
    at += len;
  }
  return phrases;
}

namespace {

bool ref_punct(char c) {
  return std::ispunct(static_cast<unsigned char>(c)) != 0;
}

bool ref_ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// Re-derives the token surfaces of a caption from the documented rules:
// lowercase, whitespace split, edge punctuation peeled one character per
// token, "n't" split off words longer than three characters.
std::vector<std::string> ref_surfaces(const std::string& caption) {
  std::vector<std::string> surfaces;
  std::string word;
  auto take_word = [&] {
    if (word.empty()) return;
    std::string w;
    for (char c : word) w += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    word.clear();

    while (!w.empty() && ref_punct(w.front())) {
      surfaces.push_back(std::string(1, w.front()));
      w.erase(w.begin());
    }
    std::string trail;
    while (!w.empty() && ref_punct(w.back()) && !ref_ends_with(w, "n't")) {
      trail.insert(trail.begin(), w.back());
      w.pop_back();
    }
    if (!w.empty()) {
      if (w.size() > 3 && ref_ends_with(w, "n't")) {
        surfaces.push_back(w.substr(0, w.size() - 3));
        surfaces.push_back("n't");
      } else {
        surfaces.push_back(w);
      }
    }
    for (char c : trail) surfaces.push_back(std::string(1, c));
  };
  for (char c : caption) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      take_word();
    } else {
      word += c;
    }
  }
  take_word();
  return surfaces;
}

bool ref_all_punct(const std::string& s) {
  for (char c : s) {
    if (!ref_punct(c)) return false;
  }
  return !s.empty();
}

}  // namespace

std::size_t ref_token_count(const std::string& caption) {
  return ref_surfaces(caption).size();
}

std::size_t ref_cue_count(const std::string& caption) {
  static const std::set<std::string> words = {"no",   "not",  "never",   "without",
                                             "n't",  "none", "neither", "nor"};
  const negkit::Lexicons& lex = negkit::Lexicons::builtin();
  std::size_t count = 0;
  for (const std::string& s : ref_surfaces(caption)) {
    if (ref_all_punct(s)) continue;
    if (words.count(s)) {
      ++count;
      continue;
    }
    if (s.size() >= 5 && s[0] == 'u' && s[1] == 'n' && lex.un_exclusions.count(s) == 0) {
      const std::string stem = s.substr(2);
      if (lex.un_stems.count(stem) || ref_ends_with(stem, "ed") ||
          ref_ends_with(stem, "ing") || ref_ends_with(stem, "able")) {
        ++count;
      }
    }
  }
  return count;
}

// --- merge -----------------------------------------------------------------

Matrix ref_merge_rows(const ParsedCaption& parsed, const Matrix& embeddings, double beta) {
  Matrix out;
  out.rows = parsed.phrases.size();
  out.cols = embeddings.cols;
  out.data.assign(out.rows * out.cols, 0.0);

  for (std::size_t p = 0; p < parsed.phrases.size(); ++p) {
    const negkit::Phrase& phrase = parsed.phrases[p];
    double total = 0.0;
    std::vector<double> gamma;
    for (std::size_t idx : phrase.token_indices) {
      const bool boosted = phrase.is_negated && parsed.tokens[idx].is_cue();
      gamma.push_back(boosted ? beta : 1.0);
      total += gamma.back();
    }
    for (std::size_t k = 0; k < phrase.token_indices.size(); ++k) {
      const std::size_t idx = phrase.token_indices[k];
      const double w = gamma[k] / total;
      for (std::size_t c = 0; c < embeddings.cols; ++c) {
        out.data[p * out.cols + c] += w * embeddings.data[idx * embeddings.cols + c];
      }
    }
  }
  return out;
}

RefAmplification ref_amplification(const std::vector<double>& token_dots,
                                   std::size_t cue_index,
                                   const std::vector<std::size_t>& cue_phrase,
                                   std::size_t phrase_count, double beta) {
  RefAmplification out;
  const double n = static_cast<double>(token_dots.size());
  const double m = static_cast<double>(phrase_count);
  out.s_single = token_dots[cue_index] / n;

  double numer = beta * token_dots[cue_index];
  for (std::size_t idx : cue_phrase) {
    if (idx != cue_index) numer += token_dots[idx];
  }
  out.s_merge = numer / ((beta + 1.0) * m);
  out.bound_factor = (beta / (beta + 1.0)) * (n / m);
  return out;
}

// --- geometry / detections -------------------------------------------------

double ref_iou_pixels(const Box& a, const Box& b) {
  const long ax1 = std::lround(a.x1), ay1 = std::lround(a.y1);
  const long ax2 = std::lround(a.x2), ay2 = std::lround(a.y2);
  const long bx1 = std::lround(b.x1), by1 = std::lround(b.y1);
  const long bx2 = std::lround(b.x2), by2 = std::lround(b.y2);

  long inter = 0;
  for (long x = std::min(ax1, bx1); x < std::max(ax2, bx2); ++x) {
    for (long y = std::min(ay1, by1); y < std::max(ay2, by2); ++y) {
      const bool in_a = x >= ax1 && x < ax2 && y >= ay1 && y < ay2;
      const bool in_b = x >= bx1 && x < bx2 && y >= by1 && y < by2;
      if (in_a && in_b) ++inter;
    }
  }
  const long area_a = (ax2 - ax1) * (ay2 - ay1);
  const long area_b = (bx2 - bx1) * (by2 - by1);
  const long uni = area_a + area_b - inter;
  if (uni <= 0) return 0.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

namespace {

double plain_iou(const Box& a, const Box& b) {
  const double ix = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
  const double iy = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
  if (ix <= 0.0 || iy <= 0.0) return 0.0;
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

// Candidate order shared by suppression and evaluation pools.
std::vector<std::size_t> by_score_caption_input(const std::vector<Detection>& dets) {
  std::vector<std::size_t> order(dets.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (dets[a].score != dets[b].score) return dets[a].score > dets[b].score;
    if (dets[a].caption_id != dets[b].caption_id) {
      return dets[a].caption_id < dets[b].caption_id;
    }
    return a < b;
  });
  return order;
}

}  // namespace

std::vector<Detection> ref_nms(const std::vector<Detection>& dets, double iou_thresh) {
  // Group per image, preserving first-appearance image order.
  std::vector<std::string> images;
  for (const Detection& det : dets) {
    if (std::find(images.begin(), images.end(), det.image_id) == images.end()) {
      images.push_back(det.image_id);
    }
  }
  std::vector<Detection> out;
  for (const std::string& image : images) {
    std::vector<Detection> group;
    for (const Detection& det : dets) {
      if (det.image_id == image) group.push_back(det);
    }
    std::vector<Detection> kept;
    for (std::size_t idx : by_score_caption_input(group)) {
      bool suppressed = false;
      for (const Detection& winner : kept) {
        if (plain_iou(winner.box, group[idx].box) > iou_thresh) {
          suppressed = true;
          break;
        }
      }
      if (!suppressed) kept.push_back(group[idx]);
    }
    out.insert(out.end(), kept.begin(), kept.end());
  }
  return out;
}

namespace {

struct RefPool {
  std::vector<Detection> dets;  // capped, in matching order
};

// Per-query pool: per-image top cap by (score, input order), then sorted by
// (score desc, image_id asc, input order asc).
RefPool ref_query_pool(const std::vector<Detection>& dets, const std::string& caption_id,
                       int max_dets) {
  struct Entry {
    Detection det;
    std::size_t pos;
  };
  std::vector<Entry> mine;
  for (std::size_t i = 0; i < dets.size(); ++i) {
    if (dets[i].caption_id == caption_id) mine.push_back({dets[i], i});
  }

  std::vector<std::string> images;
  for (const Entry& e : mine) {
    if (std::find(images.begin(), images.end(), e.det.image_id) == images.end()) {
      images.push_back(e.det.image_id);
    }
  }
  std::vector<Entry> capped;
  for (const std::string& image : images) {
    std::vector<Entry> group;
    for (const Entry& e : mine) {
      if (e.det.image_id == image) group.push_back(e);
    }
    std::sort(group.begin(), group.end(), [](const Entry& a, const Entry& b) {
      if (a.det.score != b.det.score) return a.det.score > b.det.score;
      return a.pos < b.pos;
    });
    if (group.size() > static_cast<std::size_t>(max_dets)) {
      group.resize(static_cast<std::size_t>(max_dets));
    }
    capped.insert(capped.end(), group.begin(), group.end());
  }
  std::sort(capped.begin(), capped.end(), [](const Entry& a, const Entry& b) {
    if (a.det.score != b.det.score) return a.det.score > b.det.score;
    if (a.det.image_id != b.det.image_id) return a.det.image_id < b.det.image_id;
    return a.pos < b.pos;
  });
  RefPool pool;
  for (const Entry& e : capped) pool.dets.push_back(e.det);
  return pool;
}

// Greedy hits at one threshold: best still-free GT box by (IoU desc, index
// asc) at IoU >= t.
std::vector<bool> ref_match(const RefPool& pool,
                            const std::map<std::string, std::vector<Box>>& gt, double t) {
  std::map<std::string, std::vector<bool>> used;
  for (const auto& [image, boxes] : gt) used[image].assign(boxes.size(), false);
  std::vector<bool> hits(pool.dets.size(), false);
  for (std::size_t k = 0; k < pool.dets.size(); ++k) {
    const auto it = gt.find(pool.dets[k].image_id);
    if (it == gt.end()) continue;
    std::vector<std::pair<double, std::size_t>> candidates;
    for (std::size_t b = 0; b < it->second.size(); ++b) {
      if (used[pool.dets[k].image_id][b]) continue;
      const double overlap = plain_iou(pool.dets[k].box, it->second[b]);
      if (overlap >= t) candidates.emplace_back(overlap, b);
    }
    if (candidates.empty()) continue;
    std::sort(candidates.begin(), candidates.end(),
              [](const std::pair<double, std::size_t>& a,
                 const std::pair<double, std::size_t>& b) {
                if (a.first != b.first) return a.first > b.first;
                return a.second < b.second;
              });
    used[pool.dets[k].image_id][candidates.front().second] = true;
    hits[k] = true;
  }
  return hits;
}

double ref_interpolated_ap(const std::vector<bool>& hits, std::size_t total_gt) {
  const std::size_t n = hits.size();
  std::vector<double> precision(n), recall(n);
  std::size_t tp = 0;
  for (std::size_t k = 0; k < n; ++k) {
    if (hits[k]) ++tp;
    precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
    recall[k] = static_cast<double>(tp) / static_cast<double>(total_gt);
  }
  // Right-to-left envelope.
  double running = 0.0;
  std::vector<double> envelope(n);
  for (std::size_t k = n; k-- > 0;) {
    running = std::max(running, precision[k]);
    envelope[k] = running;
  }
  double total = 0.0;
  for (int j = 0; j <= 100; ++j) {
    const double want = static_cast<double>(j) / 100.0;
    double value = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (recall[k] >= want) {
        value = envelope[k];
        break;
      }
    }
    total += value;
  }
  return total / 101.0;
}

}  // namespace

RefEval ref_evaluate(const std::vector<Detection>& dets, const QuerySet& qs,
                     const std::vector<double>& thresholds, double base_thresh,
                     int max_dets_per_image) {
  RefEval out;
  double ap_sum = 0.0;
  double recall_sum = 0.0;
  std::size_t positives = 0;
  std::size_t pooled_tp = 0;
  std::size_t pooled_dets = 0;
  std::size_t pooled_gt = 0;

  for (const negkit::Query& query : qs.queries) {
    const auto gt = qs.gt_for(query.caption_id);
    std::size_t gt_count = 0;
    for (const auto& [image, boxes] : gt) gt_count += boxes.size();
    const RefPool pool = ref_query_pool(dets, query.caption_id, max_dets_per_image);

    const std::vector<bool> base_hits = ref_match(pool, gt, base_thresh);
    pooled_tp += static_cast<std::size_t>(
        std::count(base_hits.begin(), base_hits.end(), true));
    pooled_dets += pool.dets.size();
    pooled_gt += gt_count;

    if (gt_count == 0) continue;
    ++positives;
    double query_ap = 0.0;
    double query_recall = 0.0;
    for (double t : thresholds) {
      const std::vector<bool> hits = ref_match(pool, gt, t);
      query_ap += ref_interpolated_ap(hits, gt_count);
      query_recall += static_cast<double>(std::count(hits.begin(), hits.end(), true)) /
                      static_cast<double>(gt_count);
    }
    ap_sum += query_ap / static_cast<double>(thresholds.size());
    recall_sum += query_recall / static_cast<double>(thresholds.size());
  }

  if (positives > 0) {
    out.ap = 100.0 * ap_sum / static_cast<double>(positives);
    out.recall = 100.0 * recall_sum / static_cast<double>(positives);
  }
  out.precision_pooled =
      pooled_dets == 0 ? 0.0
                       : static_cast<double>(pooled_tp) / static_cast<double>(pooled_dets);
  out.recall_pooled =
      pooled_gt == 0 ? 0.0
                     : static_cast<double>(pooled_tp) / static_cast<double>(pooled_gt);
  return out;
}

double ref_fpr(const std::vector<Detection>& dets, const QuerySet& qs, double tau) {
  std::size_t negatives = 0;
  std::size_t fired = 0;
  for (const negkit::Query& query : qs.queries) {
    if (qs.total_gt(query.caption_id) > 0) continue;
    ++negatives;
    bool any = false;
    for (const Detection& det : dets) {
      if (det.caption_id == query.caption_id && det.score >= tau) any = true;
    }
    if (any) ++fired;
  }
  if (negatives == 0) return 0.0;
  return 100.0 * static_cast<double>(fired) / static_cast<double>(negatives);
}

std::size_t ref_argmax(const std::vector<double>& scores) {
  std::size_t best = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

std::vector<std::size_t> ref_reading_order(const std::vector<Box>& boxes) {
  std::vector<std::size_t> order(boxes.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (boxes[a].y1 != boxes[b].y1) return boxes[a].y1 < boxes[b].y1;
    return boxes[a].x1 < boxes[b].x1;
  });
  return order;
}

}  // namespace oracle
