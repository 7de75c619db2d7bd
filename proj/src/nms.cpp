#include "negkit/nms.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>

#include "negkit/errors.hpp"

namespace negkit {

std::vector<Detection> class_ignored_nms(const std::vector<Detection>& dets,
                                         double iou_thresh) {
  if (!std::isfinite(iou_thresh) || iou_thresh < 0.0 || iou_thresh >= 1.0) {
    fail(ErrKind::MalformedConfig, "iou threshold must lie in [0, 1)");
  }
  for (const Detection& det : dets) {
    validate_box(det.box);
    if (det.image_id != dets.front().image_id) {
      fail(ErrKind::MixedImages, "suppression input spans multiple images");
    }
  }

  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (dets[a].score != dets[b].score) return dets[a].score > dets[b].score;
    if (dets[a].caption_id != dets[b].caption_id) {
      return dets[a].caption_id < dets[b].caption_id;
    }
    return a < b;
  });

  std::vector<Detection> kept;
  for (std::size_t idx : order) {
    bool suppressed = false;
    for (const Detection& keeper : kept) {
      if (iou(dets[idx].box, keeper.box) > iou_thresh) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(dets[idx]);
  }
  return kept;
}

std::vector<Detection> nms_batch(const std::vector<Detection>& dets, double iou_thresh,
                                 Execution exec) {
  // Bucket by image in first-appearance order.
  std::vector<std::string> image_order;
  std::vector<std::vector<Detection>> groups;
  for (const Detection& det : dets) {
    std::size_t slot = image_order.size();
    for (std::size_t i = 0; i < image_order.size(); ++i) {
      if (image_order[i] == det.image_id) {
        slot = i;
        break;
      }
    }
    if (slot == image_order.size()) {
      image_order.push_back(det.image_id);
      groups.emplace_back();
    }
    groups[slot].push_back(det);
  }

  std::vector<std::vector<Detection>> survivors(groups.size());
  std::exception_ptr first_error = nullptr;
  const long count = static_cast<long>(groups.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic) if (exec == Execution::Parallel)
#endif
  for (long i = 0; i < count; ++i) {
    try {
      const auto idx = static_cast<std::size_t>(i);
      survivors[idx] = class_ignored_nms(groups[idx], iou_thresh);
    } catch (...) {
#ifdef _OPENMP
#pragma omp critical(negkit_nms_batch_error)
#endif
      if (!first_error) first_error = std::current_exception();
    }
  }
  (void)exec;
  if (first_error) std::rethrow_exception(first_error);

  std::vector<Detection> out;
  for (const auto& group : survivors) out.insert(out.end(), group.begin(), group.end());
  return out;
}

}  // namespace negkit
