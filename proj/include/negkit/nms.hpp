#pragma once

// Caption-ignored non-maximum suppression.  Detections produced for
// different captions of the same image compete against each other: the
// greedy pass keeps the highest-scoring box and suppresses every box whose
// IoU with an already-kept box exceeds the threshold, regardless of which
// caption produced it.  Ties are broken by lower caption_id, then input
// order, so the result is a pure function of the input sequence.

#include <vector>

#include "negkit/detections.hpp"
#include "negkit/execution.hpp"

namespace negkit {

// Single image; throws MixedImages when image ids differ.  Survivors are
// returned in selection (descending-score) order.  Idempotent.
std::vector<Detection> class_ignored_nms(const std::vector<Detection>& dets,
                                         double iou_thresh = 0.5);

// Groups by image_id (first-appearance order), suppresses per image, and
// concatenates the per-image survivor lists.  Serial and Parallel produce
// identical output.
std::vector<Detection> nms_batch(const std::vector<Detection>& dets, double iou_thresh,
                                 Execution exec);

}  // namespace negkit
