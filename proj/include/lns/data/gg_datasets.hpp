#pragma once

// Procedural generators for the six Good Gestalt stimulus families.
//
// Every image is composed of "parts" (background plus one or more object
// groups). Pixel values follow the luminance law L = I * R: each part draws
// one illuminance per channel per sample (Uniform[0.1, 1.0]), and carries a
// fixed reflectance pattern, so pixels of one part co-vary exactly while
// pixels of different parts are independent across samples. Test splits keep
// the same geometry machinery but enforce a dataset-specific ambiguity (for
// example the Kanizsa square sharing the background's color).

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "lns/core/rng.hpp"
#include "lns/core/tensor.hpp"

namespace lns::gg {

constexpr int kImageSize = 64;
constexpr int kChannels = 3;

enum class DatasetId {
  kKanizsa,
  kClosure,
  kContinuity,
  kProximity,
  kGradientOcclusion,
  kIllusoryOcclusion,
};

constexpr std::array<DatasetId, 6> kAllDatasets = {
    DatasetId::kKanizsa,          DatasetId::kClosure,
    DatasetId::kContinuity,       DatasetId::kProximity,
    DatasetId::kGradientOcclusion, DatasetId::kIllusoryOcclusion,
};

inline const char* dataset_name(DatasetId id) {
  switch (id) {
    case DatasetId::kKanizsa: return "kanizsa";
    case DatasetId::kClosure: return "closure";
    case DatasetId::kContinuity: return "continuity";
    case DatasetId::kProximity: return "proximity";
    case DatasetId::kGradientOcclusion: return "gradient_occlusion";
    case DatasetId::kIllusoryOcclusion: return "illusory_occlusion";
  }
  throw std::invalid_argument("dataset_name: bad id");
}

inline DatasetId parse_dataset(const std::string& s) {
  for (DatasetId id : kAllDatasets)
    if (s == dataset_name(id)) return id;
  throw std::invalid_argument("unknown dataset id: '" + s +
                              "' (expected kanizsa|closure|continuity|"
                              "proximity|gradient_occlusion|illusory_occlusion)");
}

enum class Split { kTrain, kVal, kTest };

inline const char* split_name(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  throw std::invalid_argument("split_name: bad split");
}

inline Split parse_split(const std::string& s) {
  for (Split sp : {Split::kTrain, Split::kVal, Split::kTest})
    if (s == split_name(sp)) return sp;
  throw std::invalid_argument("unknown split: '" + s + "'");
}

/// Number of clusters a segmenter is asked for: the co-varying parts of the
/// scene including the background. Proximity depends on the sampled layout
/// (1 group of 6 squares or 3 groups of 2); everything else is fixed.
inline int expected_k(DatasetId id, int object_groups) {
  switch (id) {
    case DatasetId::kKanizsa:
      if (object_groups != 2)
        throw std::invalid_argument("kanizsa has 2 object parts");
      return 3;
    case DatasetId::kClosure:
    case DatasetId::kContinuity:
    case DatasetId::kIllusoryOcclusion:
      if (object_groups != 1)
        throw std::invalid_argument("dataset has 1 object part");
      return 2;
    case DatasetId::kGradientOcclusion:
      if (object_groups != 2)
        throw std::invalid_argument("gradient_occlusion has 2 object parts");
      return 3;
    case DatasetId::kProximity:
      if (object_groups == 1) return 2;
      if (object_groups == 3) return 4;
      throw std::invalid_argument("proximity has 1 or 3 square groups");
  }
  throw std::invalid_argument("expected_k: bad id");
}

struct SampleRecord {
  Tensor<float> image;        // [3, 64, 64], CHW, values in [0, 1]
  Tensor<std::uint8_t> mask;  // [64, 64], labels 0..k-1, 0 = background
  int k = 0;
  DatasetId dataset = DatasetId::kKanizsa;
  Split split = Split::kTrain;
  std::int64_t index = 0;
  // Illuminance actually used, one RGB triple per part (index = mask label).
  std::vector<std::array<double, 3>> illuminance;
};

namespace detail {

// Scene under construction: `visible` drives pixel values (painter's
// algorithm, later draws overwrite), `label` is the ground-truth part id.
// They coincide except where a dataset renders deliberately ambiguous pixels
// (occluded closure outlines, continuity distractors).
struct Scene {
  std::array<int, kImageSize * kImageSize> visible{};
  std::array<int, kImageSize * kImageSize> label{};
  std::array<float, kImageSize * kImageSize> reflectance{};
  int n_parts = 1;

  Scene() { reflectance.fill(1.0f); }

  static bool in_bounds(int x, int y) {
    return x >= 0 && x < kImageSize && y >= 0 && y < kImageSize;
  }

  void stamp(int x, int y, int part, float r, int label_part) {
    if (!in_bounds(x, y)) return;
    const int i = y * kImageSize + x;
    visible[i] = part;
    label[i] = label_part;
    reflectance[i] = r;
  }

  void fill_rect(int x0, int y0, int w, int h, int part, float r) {
    for (int y = y0; y < y0 + h; ++y)
      for (int x = x0; x < x0 + w; ++x) stamp(x, y, part, r, part);
  }

  void fill_circle(int cx, int cy, int radius, int part, float r) {
    for (int y = cy - radius; y <= cy + radius; ++y)
      for (int x = cx - radius; x <= cx + radius; ++x)
        if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= radius * radius)
          stamp(x, y, part, r, part);
  }
};

inline int irange(Rng& rng, int lo, int hi) {  // inclusive ends
  return lo + int(rng.next_below(std::uint64_t(hi - lo + 1)));
}

inline std::array<double, 3> draw_illuminance(Rng& rng) {
  return {rng.uniform(0.1, 1.0), rng.uniform(0.1, 1.0), rng.uniform(0.1, 1.0)};
}

// Stamp one arc of the dashed circle used by the continuity stimuli:
// centered at (cx, cy) with the given radius, spanning [a0, a0+span] radians,
// 2 px thick.
inline void stamp_arc(Scene& s, double cx, double cy, double radius, double a0,
                      double span, int part, int label_part) {
  const int steps = std::max(4, int(span * radius * 2.5));
  for (int t = 0; t <= steps; ++t) {
    const double a = a0 + span * t / steps;
    const int x = int(std::lround(cx + radius * std::cos(a)));
    const int y = int(std::lround(cy + radius * std::sin(a)));
    for (int dy = 0; dy < 2; ++dy)
      for (int dx = 0; dx < 2; ++dx) s.stamp(x + dx, y + dy, part, 1.0f, label_part);
  }
}

inline void build_kanizsa(Scene& s, Rng& rng, Split split) {
  s.n_parts = 3;  // 1 = square, 2 = circles
  const int radius = irange(rng, 5, 8);
  const int side = irange(rng, 20, 36);
  const int lo = radius + 1, hi = kImageSize - side - radius - 2;
  const int sx = irange(rng, lo, hi), sy = irange(rng, lo, hi);
  int cxs[4] = {sx, sx + side, sx, sx + side};
  int cys[4] = {sy, sy, sy + side, sy + side};
  if (split != Split::kTest) {
    // Relative positions jitter only in train/val.
    for (int i = 0; i < 4; ++i) {
      cxs[i] += irange(rng, -4, 4);
      cys[i] += irange(rng, -4, 4);
    }
  }
  for (int i = 0; i < 4; ++i) s.fill_circle(cxs[i], cys[i], radius, 2, 1.0f);
  s.fill_rect(sx, sy, side + 1, side + 1, 1, 1.0f);  // square cuts the circles
}

inline void build_closure(Scene& s, Rng& rng, Split split) {
  s.n_parts = 2;  // 1 = outlined square (outline + interior)
  const int side = irange(rng, 16, 40);
  const int x0 = irange(rng, 1, kImageSize - side - 2);
  const int y0 = irange(rng, 1, kImageSize - side - 2);
  // Interior reflectance is half the outline's; the 2:1 ratio is the part's
  // fixed internal structure.
  s.fill_rect(x0, y0, side, side, 1, 0.5f);
  s.fill_rect(x0, y0, side, 2, 1, 1.0f);
  s.fill_rect(x0, y0 + side - 2, side, 2, 1, 1.0f);
  s.fill_rect(x0, y0, 2, side, 1, 1.0f);
  s.fill_rect(x0 + side - 2, y0, 2, side, 1, 1.0f);

  if (split == Split::kTest) {
    // Hide a partial span of up to 3 outline edges: those pixels render as
    // background but stay labelled as the square.
    const int n_occluded = irange(rng, 0, 3);
    bool used[4] = {false, false, false, false};
    for (int i = 0; i < n_occluded; ++i) {
      int e;
      do {
        e = irange(rng, 0, 3);
      } while (used[e]);
      used[e] = true;
      const int len = irange(rng, side * 3 / 10, side * 7 / 10);
      const int start = irange(rng, 0, side - len);
      for (int t = start; t < start + len; ++t)
        for (int d = 0; d < 2; ++d) {
          int px, py;
          switch (e) {
            case 0: px = x0 + t; py = y0 + d; break;
            case 1: px = x0 + t; py = y0 + side - 2 + d; break;
            case 2: px = x0 + d; py = y0 + t; break;
            default: px = x0 + side - 2 + d; py = y0 + t; break;
          }
          if (Scene::in_bounds(px, py)) {
            const int idx = py * kImageSize + px;
            s.visible[idx] = 0;
            s.reflectance[idx] = 1.0f;
            s.label[idx] = 1;
          }
        }
    }
  }
}

inline void build_continuity(Scene& s, Rng& rng, Split split) {
  s.n_parts = 2;  // 1 = circle traced by dashes
  const int radius = irange(rng, 10, 24);
  const double cx = irange(rng, radius + 3, kImageSize - radius - 4);
  const double cy = irange(rng, radius + 3, kImageSize - radius - 4);
  constexpr int kArcs = 12;
  constexpr double kTau = 6.283185307179586;
  constexpr double kSpan = kTau / kArcs * 0.6;
  const double phase = rng.uniform(0.0, kTau);

  bool keep[kArcs];
  for (int i = 0; i < kArcs; ++i) keep[i] = true;
  if (split == Split::kTest) {
    const int drop = irange(rng, 3, 5);  // fragment the circle
    for (int i = 0; i < drop; ++i) {
      int a;
      do {
        a = irange(rng, 0, kArcs - 1);
      } while (!keep[a]);
      keep[a] = false;
    }
  }
  for (int i = 0; i < kArcs; ++i)
    if (keep[i])
      stamp_arc(s, cx, cy, radius, phase + kTau * i / kArcs, kSpan, 1, 1);

  if (split == Split::kTest) {
    // Distractor fragments: same arc style and color as the circle (visible
    // part 1) but ground truth keeps them in the background.
    const int n_distractors = irange(rng, 6, 12);
    for (int i = 0; i < n_distractors; ++i) {
      for (int attempt = 0; attempt < 30; ++attempt) {
        const double dx = irange(rng, 4, kImageSize - 5);
        const double dy = irange(rng, 4, kImageSize - 5);
        const double a0 = rng.uniform(0.0, kTau);
        // Reject placements that touch the circle's own pixels.
        const int steps = std::max(4, int(kSpan * radius * 2.5));
        bool clear = true;
        for (int t = 0; t <= steps && clear; ++t) {
          const double a = a0 + kSpan * t / steps;
          const int px = int(std::lround(dx + radius * std::cos(a)));
          const int py = int(std::lround(dy + radius * std::sin(a)));
          for (int oy = -1; oy <= 2 && clear; ++oy)
            for (int ox = -1; ox <= 2 && clear; ++ox)
              if (Scene::in_bounds(px + ox, py + oy) &&
                  s.label[(py + oy) * kImageSize + px + ox] == 1)
                clear = false;
        }
        if (!clear) continue;
        stamp_arc(s, dx, dy, radius, a0, kSpan, 1, 0);
        break;
      }
    }
  }
}

inline void build_proximity(Scene& s, Rng& rng, Split split, int* groups_out) {
  (void)split;
  constexpr int kSq = 6;
  const bool three_groups = rng.next_below(2) == 1;
  const int n_groups = three_groups ? 3 : 1;
  s.n_parts = n_groups + 1;
  if (groups_out) *groups_out = n_groups;

  const int between = irange(rng, 3, 6);
  const int total_w =
      three_groups ? 3 * (2 * kSq + 1) + 2 * between : 6 * kSq + 5;
  const int x0 = irange(rng, 1, kImageSize - total_w - 2);
  const int y0 = irange(rng, 4, kImageSize - kSq - 5);

  int x = x0;
  for (int i = 0; i < 6; ++i) {
    const int group = three_groups ? i / 2 : 0;
    s.fill_rect(x, y0, kSq, kSq, 1 + group, 1.0f);
    x += kSq;
    if (i < 5) {
      const bool group_boundary = three_groups && (i % 2 == 1);
      x += group_boundary ? between : 1;
    }
  }
}

inline void build_gradient_occlusion(Scene& s, Rng& rng, Split split) {
  s.n_parts = 3;  // 1 = wide gradient rectangle, 2 = tall homogeneous one
  constexpr int kWideW = 44, kWideH = 12, kTallW = 10, kTallH = 40;
  int wx, wy, tx, ty;
  if (split == Split::kTest) {
    wx = irange(rng, 1, kImageSize - kWideW - 2);
    wy = irange(rng, 14, kImageSize - kWideH - 2);
    tx = irange(rng, wx + kWideW / 4, wx + kWideW * 3 / 4 - kTallW);
    ty = irange(rng, std::max(0, wy + kWideH - kTallH),
                std::min(kImageSize - kTallH, wy));
  } else {
    // Train/val keep the rectangles disjoint so both parts are fully visible.
    for (int attempt = 0;; ++attempt) {
      wx = irange(rng, 1, kImageSize - kWideW - 2);
      wy = irange(rng, 1, kImageSize - kWideH - 2);
      tx = irange(rng, 1, kImageSize - kTallW - 2);
      ty = irange(rng, 1, kImageSize - kTallH - 2);
      const bool overlap = wx < tx + kTallW && tx < wx + kWideW &&
                           wy < ty + kTallH && ty < wy + kWideH;
      if (!overlap || attempt > 200) break;
    }
  }
  for (int x = 0; x < kWideW; ++x) {
    const float r = 0.3f + 0.7f * float(x) / float(kWideW - 1);
    for (int y = 0; y < kWideH; ++y) s.stamp(wx + x, wy + y, 1, r, 1);
  }
  s.fill_rect(tx, ty, kTallW, kTallH, 2, 1.0f);
}

inline void build_illusory_occlusion(Scene& s, Rng& rng, Split split) {
  (void)split;
  s.n_parts = 2;  // 0 = striped background, 1 = phase-offset striped square
  constexpr int kPeriod = 8;
  for (int y = 0; y < kImageSize; ++y) {
    const float r = (y % kPeriod) < kPeriod / 2 ? 1.0f : 0.5f;
    for (int x = 0; x < kImageSize; ++x) {
      s.visible[y * kImageSize + x] = 0;
      s.label[y * kImageSize + x] = 0;
      s.reflectance[y * kImageSize + x] = r;
    }
  }
  const int side = irange(rng, 24, 40);
  const int x0 = irange(rng, 0, kImageSize - side);
  // Snap to the stripe period so the square part's internal pattern is the
  // same in every sample.
  const int y0 = kPeriod * irange(rng, 0, (kImageSize - side) / kPeriod);
  for (int y = y0; y < y0 + side; ++y) {
    const float r = (y % kPeriod) < kPeriod / 2 ? 0.5f : 1.0f;  // half offset
    for (int x = x0; x < x0 + side; ++x) s.stamp(x, y, 1, r, 1);
  }
}

}  // namespace detail

/// Deterministic in (dataset, split, index, master_seed).
inline SampleRecord generate_sample(DatasetId id, Split split,
                                    std::int64_t index,
                                    std::uint64_t master_seed) {
  Rng rng = Rng(master_seed)
                .stream(dataset_name(id))
                .stream(split_name(split))
                .stream(std::uint64_t(index));

  detail::Scene scene;
  int proximity_groups = 1;
  switch (id) {
    case DatasetId::kKanizsa: detail::build_kanizsa(scene, rng, split); break;
    case DatasetId::kClosure: detail::build_closure(scene, rng, split); break;
    case DatasetId::kContinuity: detail::build_continuity(scene, rng, split); break;
    case DatasetId::kProximity:
      detail::build_proximity(scene, rng, split, &proximity_groups);
      break;
    case DatasetId::kGradientOcclusion:
      detail::build_gradient_occlusion(scene, rng, split);
      break;
    case DatasetId::kIllusoryOcclusion:
      detail::build_illusory_occlusion(scene, rng, split);
      break;
  }

  SampleRecord rec;
  rec.dataset = id;
  rec.split = split;
  rec.index = index;
  rec.k = scene.n_parts;
  if (id == DatasetId::kProximity)
    rec.k = expected_k(id, proximity_groups);

  rec.illuminance.resize(std::size_t(rec.k));
  for (auto& ill : rec.illuminance) ill = detail::draw_illuminance(rng);

  if (split == Split::kTest) {
    // Dataset-specific ambiguity: pin illuminances so the cue that separated
    // the parts in training is absent from the raw pixel values.
    auto& ill = rec.illuminance;
    switch (id) {
      case DatasetId::kKanizsa:
        ill[1] = ill[0];  // square color == background color
        break;
      case DatasetId::kClosure:
        // Interior (R 0.5) matches the background (R 1.0) exactly.
        for (int c = 0; c < kChannels; ++c) {
          ill[1][c] = rng.uniform(0.2, 1.0);
          ill[0][c] = 0.5 * ill[1][c];
        }
        break;
      case DatasetId::kProximity:
        for (std::size_t g = 2; g < ill.size(); ++g) ill[g] = ill[1];
        break;
      case DatasetId::kIllusoryOcclusion:
        ill[1] = ill[0];  // square visible only through stripe phase
        break;
      case DatasetId::kContinuity:
      case DatasetId::kGradientOcclusion:
        break;  // ambiguity comes from geometry (distractors / occlusion)
    }
  }

  rec.image = Tensor<float>({kChannels, kImageSize, kImageSize});
  rec.mask = Tensor<std::uint8_t>({kImageSize, kImageSize});
  for (int p = 0; p < kImageSize * kImageSize; ++p) {
    const int part = scene.visible[p];
    const float r = scene.reflectance[p];
    for (int c = 0; c < kChannels; ++c)
      rec.image.data[c * kImageSize * kImageSize + p] =
          float(rec.illuminance[std::size_t(part)][c]) * r;
    rec.mask.data[p] = std::uint8_t(scene.label[p]);
  }
  return rec;
}

}  // namespace lns::gg
