#include "negkit/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "negkit/errors.hpp"

namespace negkit {

void validate_box(const Box& b) {
  if (!std::isfinite(b.x1) || !std::isfinite(b.y1) || !std::isfinite(b.x2) ||
      !std::isfinite(b.y2)) {
    fail(ErrKind::InvalidBox, "box coordinates must be finite");
  }
  if (!(b.x1 < b.x2) || !(b.y1 < b.y2)) {
    fail(ErrKind::InvalidBox, "box needs x1 < x2 and y1 < y2");
  }
}

double iou(const Box& a, const Box& b) {
  const double ix1 = std::max(a.x1, b.x1);
  const double iy1 = std::max(a.y1, b.y1);
  const double ix2 = std::min(a.x2, b.x2);
  const double iy2 = std::min(a.y2, b.y2);
  const double iw = ix2 - ix1;
  const double ih = iy2 - iy1;
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.area() + b.area() - inter;
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

njson box_to_json(const Box& b) { return njson::array({b.x1, b.y1, b.x2, b.y2}); }

Box box_from_json(const njson& j) {
  if (!j.is_array() || j.size() != 4) {
    fail(ErrKind::FormatError, "box must be a 4-element array");
  }
  for (const njson& v : j) {
    if (!v.is_number()) fail(ErrKind::FormatError, "box entries must be numbers");
  }
  Box b{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
  validate_box(b);
  return b;
}

}  // namespace negkit
