#include "journeybench/synthworld.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace jb::synthworld {

namespace {

// Frontal scene constants, normalized canvas coordinates. The extractor and
// the segmentation ground truth invert exactly this geometry, so every
// constant lives here and nowhere else.
constexpr double kBg = 0.05;
constexpr double kThoraxCx = 0.5, kThoraxCy = 0.55, kThoraxAy = 0.42;
constexpr double kLungCy = 0.52, kLungOffset = 0.21, kLungAxFrac = 0.13, kLungAy = 0.30;
constexpr double kLungFill = 0.12;
constexpr int kRibCount = 8;
constexpr double kRibY0 = 0.24, kRibSpacing = 0.075, kRibSlope = 0.28, kRibHalfTh = 0.009;
constexpr double kHeartCx = 0.54, kHeartCy = 0.62, kHeartAy = 0.12, kHeartFill = 0.50;
constexpr double kFluidFrac = 0.45, kFluidFill = 0.30;
constexpr double kEdemaGain = 0.10;
constexpr double kRimRLo = 0.75, kRimCapFrac = 0.55, kPtxGain = 0.08;
constexpr double kWedgeMaxR = 0.68, kWedgeCos = -0.9397, kAtelGain = 0.25;  // 20 deg half-angle

inline double thorax_fill(int tone) { return 0.35 + 0.03 * tone; }
inline double rib_contrast(double age) { return 0.06 + 0.12 * (1.0 - age); }

constexpr int kSS = 4;  // supersampling grid per axis

double pearson_pixels(const Image& a, const Image& b) {
  double ma = 0, mb = 0;
  size_t n = a.pix.size();
  for (size_t i = 0; i < n; ++i) {
    ma += a.pix[i];
    mb += b.pix[i];
  }
  ma /= double(n);
  mb /= double(n);
  double saa = 0, sbb = 0, sab = 0;
  for (size_t i = 0; i < n; ++i) {
    double da = a.pix[i] - ma, db = b.pix[i] - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  if (saa <= 0.0 || sbb <= 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

const char* to_string(View v) { return v == View::frontal ? "frontal" : "lateral"; }

View view_from_string(const std::string& s) {
  if (s == "frontal") return View::frontal;
  if (s == "lateral") return View::lateral;
  fail(ErrorKind::InvalidArgument, "unknown view: " + s);
}

PathologyState PathologyState::clamped() const {
  auto a = as_array();
  for (double& v : a) v = clamp01(v);
  return from_array(a);
}

double PathologyState::max_attr() const {
  auto a = as_array();
  return *std::max_element(a.begin(), a.end());
}

uint64_t WorldConfig::fingerprint() const {
  std::ostringstream os;
  os.precision(17);
  os << resolution << '|' << findings_prior << '|' << incidental_prob << '|' << incidental_max;
  for (double p : step_probs) os << '|' << p;
  os << '|' << step_small << '|' << step_large << '|' << resolve_prob << '|' << jitter_rot_deg
     << '|' << jitter_trans_frac << '|' << jitter_scale_pct << '|' << lateral_prob;
  return fnv1a64(os.str());
}

// ---------------------------------------------------------------------------
// FrontalScene

FrontalScene::FrontalScene(const IdentityProfile& id, const PathologyState& state)
    : id_(id), state_(state.clamped()) {}

bool FrontalScene::in_thorax(double x, double y) const {
  double ax = 0.5 * id_.body_width;
  double dx = (x - kThoraxCx) / ax, dy = (y - kThoraxCy) / kThoraxAy;
  return dx * dx + dy * dy <= 1.0;
}

double FrontalScene::heart_ax() const { return 0.10 + 0.14 * state_.cardiomegaly; }

bool FrontalScene::in_heart(double x, double y) const {
  double dx = (x - kHeartCx) / heart_ax(), dy = (y - kHeartCy) / kHeartAy;
  return dx * dx + dy * dy <= 1.0;
}

bool FrontalScene::in_heart_dilated(double x, double y, double margin) const {
  double dx = (x - kHeartCx) / (heart_ax() + margin), dy = (y - kHeartCy) / (kHeartAy + margin);
  return dx * dx + dy * dy <= 1.0;
}

double FrontalScene::lung_center_x(int side) const {
  // side 0 = patient-right lung, which sits on the image left.
  return side == 0 ? 0.5 - kLungOffset * id_.body_width : 0.5 + kLungOffset * id_.body_width;
}

double FrontalScene::lung_ax() const { return kLungAxFrac * id_.body_width; }

double FrontalScene::lung_radius(int side, double x, double y) const {
  double dx = (x - lung_center_x(side)) / lung_ax();
  double dy = (y - kLungCy) / kLungAy;
  return std::sqrt(dx * dx + dy * dy);
}

bool FrontalScene::in_lung_region(double x, double y, int* side_out) const {
  for (int side = 0; side < 2; ++side) {
    if (lung_radius(side, x, y) <= 1.0) {
      if (in_heart(x, y)) return false;
      if (side_out) *side_out = side;
      return true;
    }
  }
  return false;
}

double FrontalScene::rib_centerline_distance(double x, double y) const {
  double u = std::abs(x - 0.5);
  double best = 1e9;
  for (int k = 0; k < kRibCount; ++k) {
    double yc = kRibY0 + k * kRibSpacing + kRibSlope * u;
    best = std::min(best, std::abs(y - yc));
  }
  return best;
}

bool FrontalScene::in_rib_band(double x, double y) const {
  return rib_centerline_distance(x, y) <= kRibHalfTh;
}

double FrontalScene::fluid_top(int side) const {
  double eff = side == 0 ? state_.effusion_right : state_.effusion_left;
  return kLungCy + kLungAy - kFluidFrac * (2.0 * kLungAy) * eff;
}

bool FrontalScene::in_fluid(int side, double x, double y) const {
  (void)x;
  return y >= fluid_top(side);
}

bool FrontalScene::in_apex_rim(int side, double x, double y) const {
  if (y > kLungCy - kRimCapFrac * kLungAy) return false;
  double r = lung_radius(side, x, y);
  return r >= kRimRLo;
}

bool FrontalScene::in_wedge(double x, double y) const {
  double dx = (x - lung_center_x(0)) / lung_ax();
  double dy = (y - kLungCy) / kLungAy;
  double r = std::sqrt(dx * dx + dy * dy);
  if (r > kWedgeMaxR || r < 1e-9) return false;
  return dx / r <= kWedgeCos;  // sector pointing laterally (away from the heart)
}

double FrontalScene::value(double x, double y) const {
  double v = kBg;
  if (in_thorax(x, y)) v = thorax_fill(id_.tissue_tone);
  int side = -1;
  if (in_lung_region(x, y, &side)) {
    v = kLungFill;
    if (in_rib_band(x, y)) v += rib_contrast(id_.age_norm);
    if (in_fluid(side, x, y)) v = kFluidFill;
    v += kEdemaGain * state_.edema;
    if (in_apex_rim(side, x, y)) v -= kPtxGain * state_.pneumothorax;
    if (side == 0 && in_wedge(x, y)) v += kAtelGain * state_.atelectasis;
  } else if (in_heart(x, y)) {
    v = kHeartFill;
  }
  return clamp01(v);
}

namespace {

// Lateral silhouette: single lung field, bright spine column, no heart
// ellipse. Exists to exercise view filtering, nothing more.
double lateral_value(const IdentityProfile& id, const PathologyState& state, double x, double y) {
  double v = kBg;
  double ax = 0.22 + 0.14 * id.body_width;
  double dx = (x - 0.48) / ax, dy = (y - kThoraxCy) / 0.44;
  if (dx * dx + dy * dy <= 1.0) {
    v = 0.38 + 0.03 * id.tissue_tone;
    double lx = (x - 0.44) / 0.17, ly = (y - 0.50) / 0.27;
    if (lx * lx + ly * ly <= 1.0) v = 0.10 + kEdemaGain * state.edema;
    if (x >= 0.60 && x <= 0.68) v = 0.55;  // spine column
  }
  return clamp01(v);
}

}  // namespace

Image render(const IdentityProfile& id, const PathologyState& state, View view,
             const AffineTransform& jitter, int resolution) {
  require(resolution == 32 || resolution == 64 || resolution == 128, ErrorKind::InvalidArgument,
          "unsupported resolution " + std::to_string(resolution) + " (want 32, 64 or 128)");
  Image img(resolution, resolution);
  FrontalScene scene(id, state);
  const double inv = 1.0 / resolution;
  for (int py = 0; py < resolution; ++py) {
    for (int px = 0; px < resolution; ++px) {
      double acc = 0.0;
      for (int sy = 0; sy < kSS; ++sy) {
        for (int sx = 0; sx < kSS; ++sx) {
          double x = (px + (sx + 0.5) / kSS) * inv;
          double y = (py + (sy + 0.5) / kSS) * inv;
          acc += view == View::frontal ? scene.value(x, y) : lateral_value(id, state, x, y);
        }
      }
      img.at(px, py) = float(acc / (kSS * kSS));
    }
  }
  if (!jitter.is_identity()) img = apply_affine(img, jitter);
  img.snap_to_u8();
  return img;
}

Image render(const IdentityProfile& id, const PathologyState& state, View view, int resolution) {
  return render(id, state, view, AffineTransform::identity(), resolution);
}

// ---------------------------------------------------------------------------
// Journey generation

PathologyState advance_state(const PathologyState& state, Rng& rng, const WorldConfig& cfg) {
  const std::vector<double> probs(cfg.step_probs.begin(), cfg.step_probs.end());
  const double deltas[5] = {-cfg.step_large, -cfg.step_small, 0.0, cfg.step_small, cfg.step_large};
  auto a = state.as_array();
  for (double& v : a) v = clamp01(v + deltas[rng.pick(probs)]);
  if (rng.bernoulli(cfg.resolve_prob)) {
    std::vector<int> nonzero;
    for (int i = 0; i < 6; ++i)
      if (a[i] > 0.0) nonzero.push_back(i);
    if (!nonzero.empty()) a[nonzero[size_t(rng.below(nonzero.size()))]] = 0.0;
  }
  return PathologyState::from_array(a);
}

PatientJourney new_journey(uint64_t seed, int n_studies, const WorldConfig& cfg) {
  require(n_studies >= 1, ErrorKind::InvalidArgument, "n_studies must be >= 1");
  Rng rng(Rng::child_seed(seed, "journey"));

  PatientJourney j;
  j.identity.patient_id = "p" + hex64(rng.next_u64()).substr(8);
  j.identity.body_width = rng.uniform(0.70, 0.95);
  j.identity.tissue_tone = int(rng.below(3));
  j.identity.age_norm = rng.uniform();

  PathologyState state;
  {
    auto a = state.as_array();
    if (rng.bernoulli(cfg.findings_prior)) {
      int k = rng.range_int(1, 2);
      for (int c = 0; c < k; ++c) a[rng.below(6)] = rng.uniform(0.3, 0.9);
    }
    for (double& v : a)
      if (v == 0.0 && rng.bernoulli(cfg.incidental_prob)) v = rng.uniform(0.0, cfg.incidental_max);
    state = PathologyState::from_array(a);
  }

  for (int i = 0; i < n_studies; ++i) {
    if (i > 0) state = advance_state(state, rng, cfg);
    StudyRecord s;
    s.study_id = j.identity.patient_id + "-s" + std::to_string(i);
    s.time_index = i;
    s.state = state;
    s.view = rng.bernoulli(cfg.lateral_prob) ? View::lateral : View::frontal;
    s.jitter.rotation_deg = rng.uniform(-cfg.jitter_rot_deg, cfg.jitter_rot_deg);
    s.jitter.tx = rng.uniform(-cfg.jitter_trans_frac, cfg.jitter_trans_frac) * cfg.resolution;
    s.jitter.ty = rng.uniform(-cfg.jitter_trans_frac, cfg.jitter_trans_frac) * cfg.resolution;
    s.jitter.scale = 1.0 + rng.uniform(-cfg.jitter_scale_pct, cfg.jitter_scale_pct);
    s.image = render(j.identity, state, s.view, s.jitter, cfg.resolution);
    s.report_text = describe_findings(state);
    j.studies.push_back(std::move(s));
  }
  return j;
}

// ---------------------------------------------------------------------------
// Findings text

namespace {

const char* magnitude_word(double v) {
  if (v < 0.2) return "mild";
  if (v < 0.5) return "moderate";
  return "large";
}

}  // namespace

std::string describe_findings(const PathologyState& state) {
  // Fixed phrase order: cardiomegaly, right effusion, left effusion, edema,
  // pneumothorax, atelectasis.
  struct Entry {
    double v;
    const char* name;
  };
  const Entry entries[6] = {
      {state.cardiomegaly, "cardiomegaly."},
      {state.effusion_right, "right pleural effusion."},
      {state.effusion_left, "left pleural effusion."},
      {state.edema, "edema."},
      {state.pneumothorax, "pneumothorax."},
      {state.atelectasis, "atelectasis."},
  };
  std::string out;
  for (const Entry& e : entries) {
    if (e.v < 0.05) continue;
    if (!out.empty()) out += ' ';
    out += magnitude_word(e.v);
    out += ' ';
    out += e.name;
  }
  if (out.empty()) out = "no acute findings.";
  return out;
}

// ---------------------------------------------------------------------------
// Analytic extraction

const Image& canonical_template(int resolution) {
  static std::mutex mu;
  static std::map<int, Image> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(resolution);
  if (it == cache.end()) {
    IdentityProfile id;
    id.patient_id = "template";
    id.body_width = 0.825;
    id.tissue_tone = 1;
    id.age_norm = 0.5;
    it = cache.emplace(resolution, render(id, PathologyState{}, View::frontal, resolution)).first;
  }
  return it->second;
}

namespace {

struct EdgePair {
  double left = 0.0, right = 0.0;
  bool ok = false;
};

// Walk outward from x_start on row py until intensity drops below `floor`,
// then locate the sub-pixel crossing of `level` near the drop.
double edge_scan(const Image& img, int py, int x_start, int dir, double floor_v, double level) {
  int x = x_start;
  while (true) {
    int nx = x + dir;
    if (nx < 0 || nx >= img.width) break;
    if (img.at(nx, py) < floor_v) break;
    x = nx;
  }
  // Crossing of `level` between x and x+dir (clamped to image).
  int x2 = std::clamp(x + dir, 0, img.width - 1);
  double v1 = img.at(x, py), v2 = img.at(x2, py);
  if (v1 <= level) {
    // Edge fell inside the previous pixel: interpolate backwards.
    int x0 = std::clamp(x - dir, 0, img.width - 1);
    double v0 = img.at(x0, py);
    if (v0 > level && v0 > v1) return x0 + dir * (v0 - level) / (v0 - v1);
    return double(x);
  }
  if (v1 - v2 <= 1e-12) return double(x) + 0.5 * dir;
  return x + dir * (v1 - level) / (v1 - v2);
}

}  // namespace

ExtractedAttributes extract_attributes(const Image& img) {
  require(img.width == img.height && img.width > 0, ErrorKind::InvalidArgument,
          "extraction expects a square image");
  const int W = img.width;
  const double inv = 1.0 / W;

  ExtractedAttributes out;
  out.template_ncc = pearson_pixels(img, canonical_template(W));
  if (out.template_ncc < 0.3) {
    fail(ErrorKind::ExtractionFailure,
         "image does not match thorax template (ncc=" + std::to_string(out.template_ncc) + ")");
  }

  auto px_center = [&](int p) { return (p + 0.5) * inv; };
  auto row_near = [&](double y) { return std::clamp(int(std::lround(y * W - 0.5)), 0, W - 1); };
  auto col_near = [&](double x) { return std::clamp(int(std::lround(x * W - 0.5)), 0, W - 1); };

  // --- tissue tone: mediastinum probe between the lungs, above the heart.
  {
    double sum = 0.0;
    int n = 0;
    for (int py = 0; py < W; ++py) {
      double y = px_center(py);
      if (y < 0.30 || y > 0.44) continue;
      for (int px = 0; px < W; ++px) {
        double x = px_center(px);
        if (x < 0.465 || x > 0.535) continue;
        sum += img.at(px, py);
        ++n;
      }
    }
    double mean = n > 0 ? sum / n : thorax_fill(1);
    out.tissue_tone_score = (mean - 0.35) / 0.03;
    out.tissue_tone = std::clamp(int(std::lround(out.tissue_tone_score)), 0, 2);
  }

  // --- body width from the thorax run at its widest row.
  {
    int py = row_near(kThoraxCy);
    double level = (kBg + thorax_fill(out.tissue_tone)) / 2.0;
    double right = edge_scan(img, py, W / 2, +1, 0.10, level);
    double left = edge_scan(img, py, W / 2, -1, 0.10, level);
    double width_norm = (right - left) * inv;
    double dy = (px_center(py) - kThoraxCy) / kThoraxAy;
    double corr = std::sqrt(std::max(1e-9, 1.0 - dy * dy));
    out.body_width = std::clamp(width_norm / corr, 0.5, 1.0);
  }

  // --- cardiomegaly from the heart run at three rows around its center.
  {
    int cx = col_near(kHeartCx);
    double acc = 0.0;
    int n = 0;
    for (double yr : {0.60, 0.62, 0.64}) {
      int py = row_near(yr);
      double dy = (px_center(py) - kHeartCy) / kHeartAy;
      double corr = std::sqrt(std::max(0.0, 1.0 - dy * dy));
      if (corr < 0.5) continue;
      if (img.at(cx, py) < 0.46) {
        acc += 0.0;  // heart signal absent on this row
        ++n;
        continue;
      }
      auto side_edge = [&](int dir) {
        int x = cx;
        while (true) {
          int nx = x + dir;
          if (nx < 0 || nx >= W) break;
          if (img.at(nx, py) < 0.46) break;
          x = nx;
        }
        int xo = std::clamp(x + 2 * dir, 0, W - 1);
        double base = img.at(xo, py);
        double level = (kHeartFill + base) / 2.0;
        return edge_scan(img, py, cx, dir, 0.46, level);
      };
      double semi_norm = (side_edge(+1) - side_edge(-1)) * inv / 2.0;
      double ax_est = semi_norm / corr;
      acc += clamp01((ax_est - 0.10) / 0.14);
      ++n;
    }
    out.state.cardiomegaly = n > 0 ? acc / n : 0.0;
  }

  // Geometry for the remaining probes, from the estimates so far.
  IdentityProfile id_est;
  id_est.body_width = out.body_width;
  id_est.tissue_tone = out.tissue_tone;
  PathologyState st_est;
  st_est.cardiomegaly = out.state.cardiomegaly;
  FrontalScene geo(id_est, st_est);

  const double ribExcl = 2.5 * kRibHalfTh;

  // --- edema: clean left-lung mid zone (no ribs, no wedge, above any fluid).
  double edema_base = kLungFill;  // measured zone mean, fallback to dry fill
  {
    double sum = 0.0;
    int n = 0;
    for (int py = 0; py < W; ++py) {
      double y = px_center(py);
      if (y < 0.44 || y > 0.545) continue;
      for (int px = 0; px < W; ++px) {
        double x = px_center(px);
        if (geo.lung_radius(1, x, y) > 0.88) continue;
        if (geo.in_heart_dilated(x, y, 0.025)) continue;
        if (geo.rib_centerline_distance(x, y) <= ribExcl) continue;
        sum += img.at(px, py);
        ++n;
      }
    }
    if (n > 0) edema_base = sum / n;
    out.state.edema = clamp01((edema_base - kLungFill) / kEdemaGain);
  }

  // --- age from the integrated rib signal over the same zone.
  {
    double signal = 0.0, area = 0.0;
    for (int py = 0; py < W; ++py) {
      double y = px_center(py);
      if (y < 0.44 || y > 0.545) continue;
      for (int px = 0; px < W; ++px) {
        double x = px_center(px);
        if (geo.lung_radius(1, x, y) > 0.88) continue;
        if (geo.in_heart_dilated(x, y, 0.025)) continue;
        signal += img.at(px, py) - edema_base;
        // Rib coverage with the renderer's own supersampling rule.
        int hits = 0;
        for (int sy = 0; sy < kSS; ++sy) {
          for (int sx = 0; sx < kSS; ++sx) {
            double xs = (px + (sx + 0.5) / kSS) * inv;
            double ys = (py + (sy + 0.5) / kSS) * inv;
            if (geo.rib_centerline_distance(xs, ys) <= kRibHalfTh &&
                geo.lung_radius(1, xs, ys) <= 1.0 && !geo.in_heart(xs, ys))
              ++hits;
          }
        }
        area += double(hits) / (kSS * kSS);
      }
    }
    if (area > 0.5) {
      double contrast = signal / area;
      out.age_norm = clamp01(1.0 - (contrast - 0.06) / 0.12);
    } else {
      out.age_norm = 0.5;
    }
  }

  // --- per-side effusion by soft fluid area, inverted through the analytic
  // area-vs-magnitude curve evaluated over the identical pixel set.
  for (int side = 0; side < 2; ++side) {
    struct ZonePix {
      int px, py;
    };
    std::vector<ZonePix> zone;
    for (int py = 0; py < W; ++py) {
      double y = px_center(py);
      if (y < 0.545) continue;
      for (int px = 0; px < W; ++px) {
        double x = px_center(px);
        if (geo.lung_radius(side, x, y) > 0.93) continue;
        if (geo.in_heart_dilated(x, y, 0.025)) continue;
        if (geo.rib_centerline_distance(x, y) <= 2.0 * kRibHalfTh) continue;
        if (side == 0) {  // stay clear of the atelectasis wedge
          double dx = (x - geo.lung_center_x(0)) / geo.lung_ax();
          double dyl = (y - geo.lung_center_y()) / geo.lung_ay();
          double r = std::sqrt(dx * dx + dyl * dyl);
          if (r <= 0.72 && r > 1e-9 && dx / r <= -0.92) continue;
        }
        zone.push_back({px, py});
      }
    }
    double measured = 0.0;
    for (const auto& zp : zone) {
      double v = img.at(zp.px, zp.py);
      measured += clamp01((v - edema_base) / (kFluidFill - kLungFill));
    }
    // Analytic lookup: expected soft area as a function of effusion level.
    auto area_at = [&](double eff) {
      double top = kLungCy + kLungAy - kFluidFrac * 2.0 * kLungAy * eff;
      double a = 0.0;
      for (const auto& zp : zone) {
        int hits = 0;
        for (int sy = 0; sy < kSS; ++sy) {
          double ys = (zp.py + (sy + 0.5) / kSS) * inv;
          if (ys >= top) hits += kSS;
        }
        a += double(hits) / (kSS * kSS);
      }
      return a;
    };
    double eff = 0.0;
    if (!zone.empty() && measured > 1e-6) {
      double lo = 0.0, hi = 1.0;
      if (measured >= area_at(1.0)) {
        eff = 1.0;
      } else {
        for (int it = 0; it < 40; ++it) {
          double mid = 0.5 * (lo + hi);
          if (area_at(mid) < measured)
            lo = mid;
          else
            hi = mid;
        }
        eff = 0.5 * (lo + hi);
      }
    }
    if (side == 0)
      out.state.effusion_right = eff;
    else
      out.state.effusion_left = eff;
  }

  // --- pneumothorax: apex rim darkening vs. same-cap interior, both lungs.
  {
    double rim_sum = 0, base_sum = 0;
    int rim_n = 0, base_n = 0;
    for (int side = 0; side < 2; ++side) {
      for (int py = 0; py < W; ++py) {
        double y = px_center(py);
        if (y > kLungCy - 0.58 * kLungAy) continue;
        for (int px = 0; px < W; ++px) {
          double x = px_center(px);
          double r = geo.lung_radius(side, x, y);
          if (r > 0.96) continue;
          if (geo.rib_centerline_distance(x, y) <= 2.0 * kRibHalfTh) continue;
          if (r >= 0.79) {
            rim_sum += img.at(px, py);
            ++rim_n;
          } else if (r <= 0.70) {
            base_sum += img.at(px, py);
            ++base_n;
          }
        }
      }
    }
    if (rim_n > 0 && base_n > 0)
      out.state.pneumothorax = clamp01((base_sum / base_n - rim_sum / rim_n) / kPtxGain);
  }

  // --- atelectasis: wedge sector mean over the clean-lung baseline.
  {
    double sum = 0.0;
    int n = 0;
    for (int py = 0; py < W; ++py) {
      double y = px_center(py);
      for (int px = 0; px < W; ++px) {
        double x = px_center(px);
        double dx = (x - geo.lung_center_x(0)) / geo.lung_ax();
        double dyl = (y - geo.lung_center_y()) / geo.lung_ay();
        double r = std::sqrt(dx * dx + dyl * dyl);
        if (r > 0.60 || r < 1e-9) continue;
        if (dx / r > kWedgeCos) continue;
        if (geo.rib_centerline_distance(x, y) <= ribExcl) continue;
        sum += img.at(px, py);
        ++n;
      }
    }
    if (n > 0) out.state.atelectasis = clamp01((sum / n - edema_base) / kAtelGain);
  }

  return out;
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

json jitter_to_json(const AffineTransform& t) {
  return json{{"rotation_deg", t.rotation_deg}, {"tx", t.tx}, {"ty", t.ty}, {"scale", t.scale}};
}

AffineTransform jitter_from_json(const json& j) {
  AffineTransform t;
  t.rotation_deg = j.at("rotation_deg").get<double>();
  t.tx = j.at("tx").get<double>();
  t.ty = j.at("ty").get<double>();
  t.scale = j.at("scale").get<double>();
  return t;
}

json state_to_json(const PathologyState& s) {
  json j;
  auto a = s.as_array();
  for (int i = 0; i < 6; ++i) j[kAttributeNames[i]] = a[i];
  return j;
}

PathologyState state_from_json(const json& j) {
  std::array<double, 6> a{};
  for (int i = 0; i < 6; ++i) a[i] = j.at(kAttributeNames[i]).get<double>();
  return PathologyState::from_array(a);
}

}  // namespace

void write_journeys(const std::string& dir, const std::vector<PatientJourney>& journeys,
                    int resolution) {
  fs::create_directories(dir);
  std::ofstream f(fs::path(dir) / "journeys.jsonl");
  require(bool(f), ErrorKind::IoError, "cannot write journeys.jsonl in " + dir);
  json header{{"format", "journeys-v1"},
              {"resolution", resolution},
              {"patients", journeys.size()}};
  f << header.dump() << '\n';
  for (const auto& j : journeys) {
    for (const auto& s : j.studies) {
      std::string img_name = j.identity.patient_id + "_" + std::to_string(s.time_index) + ".png";
      write_png((fs::path(dir) / img_name).string(), s.image);
      json rec{{"patient_id", j.identity.patient_id},
               {"body_width", j.identity.body_width},
               {"tissue_tone", j.identity.tissue_tone},
               {"age_norm", j.identity.age_norm},
               {"study_id", s.study_id},
               {"time_index", s.time_index},
               {"state", state_to_json(s.state)},
               {"view", to_string(s.view)},
               {"jitter", jitter_to_json(s.jitter)},
               {"report_text", s.report_text},
               {"image", img_name}};
      f << rec.dump() << '\n';
    }
  }
}

std::vector<PatientJourney> read_journeys(const std::string& dir, int* resolution_out) {
  std::ifstream f(fs::path(dir) / "journeys.jsonl");
  require(bool(f), ErrorKind::IoError, "cannot open journeys.jsonl in " + dir);
  std::string line;
  int line_no = 0;
  require(bool(std::getline(f, line)), ErrorKind::ManifestCorrupt, "journeys.jsonl is empty");
  ++line_no;
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception&) {
    fail(ErrorKind::ManifestCorrupt, "journeys.jsonl line 1: bad header");
  }
  require(header.value("format", "") == "journeys-v1", ErrorKind::ManifestCorrupt,
          "journeys.jsonl: unknown format tag");
  int resolution = header.at("resolution").get<int>();
  if (resolution_out) *resolution_out = resolution;

  std::vector<PatientJourney> out;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception&) {
      fail(ErrorKind::ManifestCorrupt, "journeys.jsonl line " + std::to_string(line_no));
    }
    std::string pid = rec.at("patient_id").get<std::string>();
    if (out.empty() || out.back().identity.patient_id != pid) {
      PatientJourney j;
      j.identity.patient_id = pid;
      j.identity.body_width = rec.at("body_width").get<double>();
      j.identity.tissue_tone = rec.at("tissue_tone").get<int>();
      j.identity.age_norm = rec.at("age_norm").get<double>();
      out.push_back(std::move(j));
    }
    StudyRecord s;
    s.study_id = rec.at("study_id").get<std::string>();
    s.time_index = rec.at("time_index").get<int>();
    s.state = state_from_json(rec.at("state"));
    s.view = view_from_string(rec.at("view").get<std::string>());
    s.jitter = jitter_from_json(rec.at("jitter"));
    s.report_text = rec.at("report_text").get<std::string>();
    s.image = read_png((fs::path(dir) / rec.at("image").get<std::string>()).string());
    require(s.image.width == resolution && s.image.height == resolution,
            ErrorKind::ManifestCorrupt,
            "journeys.jsonl line " + std::to_string(line_no) + ": image resolution mismatch");
    out.back().studies.push_back(std::move(s));
  }
  return out;
}

}  // namespace jb::synthworld
