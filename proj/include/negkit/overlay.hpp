#pragma once

// Visual-prompt geometry for region-grounded generation and VQA alignment.
//
// An overlay marks one target region with a red rectangle (left unlabeled) and
// letters every same-type sibling region A, B, C, ... in reading order
// (top-to-bottom then left-to-right, i.e. sorted by (y1, x1), input order
// breaking exact ties).  Each letter is a small square tag whose anchor is the
// square's top-left corner, placed just outside the region's top-left corner
// at (x1, y1 - label_size); when that would leave the image, the tag moves
// inside the region's top-left corner instead and the label is flagged
// `inside`.  Anchors are clamped so the whole tag stays within the image.
//
// The core pipeline only ever manipulates this geometry; rasterization is an
// optional step behind OverlayRenderer so everything else runs imageless.

#include <string>
#include <vector>

#include "negkit/geometry.hpp"
#include "negkit/json.hpp"

namespace negkit {

struct OverlayLabel {
  char letter = 'A';      // unique per overlay, 'A'..'Z'
  Box region;             // the sibling box this letter names
  double anchor_x = 0.0;  // top-left corner of the square tag
  double anchor_y = 0.0;
  bool inside = false;    // true when the tag sits inside the region
};

struct OverlaySpec {
  double width = 0.0;   // image extent in pixels
  double height = 0.0;
  Box target;           // drawn as a red rectangle, never lettered
  std::vector<OverlayLabel> labels;
  double label_size = 20.0;  // side of the square letter tag
  double line_width = 3.0;   // rectangle stroke width
};

// Builds the overlay geometry.  Boxes must lie within [0,width]x[0,height]
// (BoxOutOfBounds otherwise); at most 26 siblings can be lettered
// (UsageError beyond that).
OverlaySpec render_overlay(double width, double height, const Box& target,
                           const std::vector<Box>& siblings, double label_size = 20.0,
                           double line_width = 3.0);

njson overlay_to_json(const OverlaySpec& spec);

class OverlayRenderer {
 public:
  virtual ~OverlayRenderer() = default;
  virtual std::string render(const OverlaySpec& spec) = 0;
};

// Minimal raster backend: binary PPM (P6) on a white canvas.  The target box
// is stroked red, siblings blue; each letter tag is a filled dark square
// carrying (letter index + 1) white tick columns so tags stay distinguishable
// without a font.
class PpmOverlayRenderer : public OverlayRenderer {
 public:
  std::string render(const OverlaySpec& spec) override;
};

}  // namespace negkit
