#pragma once

// Axis-aligned boxes in (x1, y1, x2, y2) corner form.

#include "negkit/json.hpp"

namespace negkit {

struct Box {
  double x1 = 0.0;
  double y1 = 0.0;
  double x2 = 0.0;
  double y2 = 0.0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  double area() const { return width() * height(); }
};

// Finite coordinates with x1 < x2 and y1 < y2; throws InvalidBox otherwise.
void validate_box(const Box& b);

// Intersection over union; 0 for disjoint boxes.  Inputs must be valid.
double iou(const Box& a, const Box& b);

njson box_to_json(const Box& b);          // [x1, y1, x2, y2]
Box box_from_json(const njson& j);        // FormatError / InvalidBox

}  // namespace negkit
