#include "negkit/overlay.hpp"

#include <algorithm>
#include <cmath>

#include "negkit/errors.hpp"

namespace negkit {

namespace {

void check_in_image(const Box& box, double width, double height, const char* what) {
  validate_box(box);
  if (box.x1 < 0.0 || box.y1 < 0.0 || box.x2 > width || box.y2 > height) {
    fail(ErrKind::BoxOutOfBounds, std::string(what) + " box exceeds the image extent");
  }
}

double clamp(double v, double lo, double hi) { return std::min(std::max(v, lo), hi); }

}  // namespace

OverlaySpec render_overlay(double width, double height, const Box& target,
                           const std::vector<Box>& siblings, double label_size,
                           double line_width) {
  if (!std::isfinite(width) || !std::isfinite(height) || width <= 0.0 || height <= 0.0) {
    fail(ErrKind::MalformedConfig, "image extent must be positive and finite");
  }
  if (!std::isfinite(label_size) || label_size <= 0.0) {
    fail(ErrKind::MalformedConfig, "label size must be positive");
  }
  check_in_image(target, width, height, "target");
  for (const Box& sibling : siblings) check_in_image(sibling, width, height, "sibling");
  if (siblings.size() > 26) {
    fail(ErrKind::UsageError, "at most 26 sibling boxes can be lettered");
  }

  // Reading order: top-to-bottom, then left-to-right; input order on ties.
  std::vector<std::size_t> order(siblings.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (siblings[a].y1 != siblings[b].y1) return siblings[a].y1 < siblings[b].y1;
    return siblings[a].x1 < siblings[b].x1;
  });

  OverlaySpec spec;
  spec.width = width;
  spec.height = height;
  spec.target = target;
  spec.label_size = label_size;
  spec.line_width = line_width;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const Box& box = siblings[order[k]];
    OverlayLabel label;
    label.letter = static_cast<char>('A' + k);
    label.region = box;
    label.anchor_x = box.x1;
    label.anchor_y = box.y1 - label_size;
    if (label.anchor_y < 0.0) {
      // No room above the box: move the tag inside its top-left corner.
      label.inside = true;
      label.anchor_y = box.y1;
    }
    label.anchor_x = clamp(label.anchor_x, 0.0, std::max(0.0, width - label_size));
    label.anchor_y = clamp(label.anchor_y, 0.0, std::max(0.0, height - label_size));
    spec.labels.push_back(label);
  }
  return spec;
}

njson overlay_to_json(const OverlaySpec& spec) {
  njson j;
  j["width"] = spec.width;
  j["height"] = spec.height;
  j["target"] = box_to_json(spec.target);
  j["label_size"] = spec.label_size;
  j["line_width"] = spec.line_width;
  njson labels = njson::array();
  for (const OverlayLabel& label : spec.labels) {
    labels.push_back(njson{{"letter", std::string(1, label.letter)},
                           {"box", box_to_json(label.region)},
                           {"anchor", njson::array({label.anchor_x, label.anchor_y})},
                           {"inside", label.inside}});
  }
  j["labels"] = labels;
  return j;
}

namespace {

struct Canvas {
  int w;
  int h;
  std::string pixels;  // RGB triples

  Canvas(int width, int height) : w(width), h(height) {
    pixels.assign(static_cast<std::size_t>(w) * h * 3, static_cast<char>(0xff));
  }

  void set(int x, int y, unsigned char r, unsigned char g, unsigned char b) {
    if (x < 0 || y < 0 || x >= w || y >= h) return;
    const std::size_t at = (static_cast<std::size_t>(y) * w + x) * 3;
    pixels[at] = static_cast<char>(r);
    pixels[at + 1] = static_cast<char>(g);
    pixels[at + 2] = static_cast<char>(b);
  }

  void stroke_rect(const Box& box, int width, unsigned char r, unsigned char g,
                   unsigned char b) {
    const int x1 = static_cast<int>(std::lround(box.x1));
    const int y1 = static_cast<int>(std::lround(box.y1));
    const int x2 = static_cast<int>(std::lround(box.x2));
    const int y2 = static_cast<int>(std::lround(box.y2));
    for (int t = 0; t < width; ++t) {
      for (int x = x1; x <= x2; ++x) {
        set(x, y1 + t, r, g, b);
        set(x, y2 - t, r, g, b);
      }
      for (int y = y1; y <= y2; ++y) {
        set(x1 + t, y, r, g, b);
        set(x2 - t, y, r, g, b);
      }
    }
  }

  void fill_rect(int x1, int y1, int x2, int y2, unsigned char r, unsigned char g,
                 unsigned char b) {
    for (int y = y1; y < y2; ++y) {
      for (int x = x1; x < x2; ++x) set(x, y, r, g, b);
    }
  }
};

}  // namespace

std::string PpmOverlayRenderer::render(const OverlaySpec& spec) {
  const int w = static_cast<int>(std::lround(spec.width));
  const int h = static_cast<int>(std::lround(spec.height));
  Canvas canvas(w, h);
  const int stroke = std::max(1, static_cast<int>(std::lround(spec.line_width)));

  for (const OverlayLabel& label : spec.labels) {
    canvas.stroke_rect(label.region, stroke, 0x20, 0x50, 0xd0);
    const int ax = static_cast<int>(std::lround(label.anchor_x));
    const int ay = static_cast<int>(std::lround(label.anchor_y));
    const int size = static_cast<int>(std::lround(spec.label_size));
    canvas.fill_rect(ax, ay, ax + size, ay + size, 0x20, 0x20, 0x20);
    // Tick columns stand in for the glyph: 1 tick for A, 2 for B, ...
    const int ticks = label.letter - 'A' + 1;
    for (int t = 0; t < ticks && t < size / 2; ++t) {
      canvas.fill_rect(ax + 1 + 2 * t, ay + 2, ax + 2 + 2 * t, ay + size - 2, 0xff, 0xff,
                       0xff);
    }
  }
  canvas.stroke_rect(spec.target, stroke, 0xe0, 0x10, 0x10);

  std::string out = "P6\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  out += canvas.pixels;
  return out;
}

}  // namespace negkit
