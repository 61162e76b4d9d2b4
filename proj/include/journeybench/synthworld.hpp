#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "journeybench/affine.hpp"
#include "journeybench/image.hpp"
#include "journeybench/rng.hpp"

namespace jb::synthworld {

enum class View { frontal, lateral };

const char* to_string(View v);
View view_from_string(const std::string& s);

// Identity attributes fixed across a journey. tissue_tone and age_norm are
// the retention attributes the evaluation harness checks for preservation.
struct IdentityProfile {
  std::string patient_id;
  double body_width = 0.825;  // fraction of canvas width occupied by thorax
  int tissue_tone = 1;        // {0,1,2}, global soft-tissue intensity offset
  double age_norm = 0.5;      // [0,1]; maps monotonically to rib contrast
};

struct PathologyState {
  double cardiomegaly = 0.0;
  double effusion_left = 0.0;
  double effusion_right = 0.0;
  double edema = 0.0;
  double pneumothorax = 0.0;
  double atelectasis = 0.0;

  std::array<double, 6> as_array() const {
    return {cardiomegaly, effusion_left, effusion_right, edema, pneumothorax, atelectasis};
  }
  static PathologyState from_array(const std::array<double, 6>& a) {
    return {a[0], a[1], a[2], a[3], a[4], a[5]};
  }
  PathologyState clamped() const;
  double max_attr() const;
  bool quiet(double eps = 0.05) const { return max_attr() < eps; }
};

// Storage order of as_array()/from_array().
inline constexpr std::array<const char*, 6> kAttributeNames = {
    "cardiomegaly", "effusion_left", "effusion_right",
    "edema",        "pneumothorax",  "atelectasis"};

struct WorldConfig {
  int resolution = 64;
  double findings_prior = 0.8;  // chance the initial state carries >=1 finding >= 0.3
  double incidental_prob = 0.2; // chance per remaining attribute of a low-grade value
  double incidental_max = 0.25;
  // advance_state step distribution over {-large, -small, 0, +small, +large}
  std::array<double, 5> step_probs = {0.1, 0.2, 0.4, 0.2, 0.1};
  double step_small = 0.15;
  double step_large = 0.45;
  double resolve_prob = 0.1;  // chance one nonzero attribute snaps to exactly 0
  // acquisition pose jitter per study
  double jitter_rot_deg = 5.0;
  double jitter_trans_frac = 0.04;  // of canvas width, pixels = frac*W
  double jitter_scale_pct = 0.05;
  double lateral_prob = 0.08;  // chance a study is a lateral view

  uint64_t fingerprint() const;
};

struct StudyRecord {
  std::string study_id;
  int time_index = 0;
  PathologyState state;
  View view = View::frontal;
  AffineTransform jitter;
  Image image;
  std::string report_text;
};

struct PatientJourney {
  IdentityProfile identity;
  std::vector<StudyRecord> studies;
};

// Deterministic journey generation: identical (seed, n_studies, cfg) give
// bit-identical journeys.
PatientJourney new_journey(uint64_t seed, int n_studies, const WorldConfig& cfg);

PathologyState advance_state(const PathologyState& state, Rng& rng, const WorldConfig& cfg);

// Pure deterministic renderer; resolution must be one of {32, 64, 128}.
// Output pixels are snapped to the 8-bit grid so images survive PNG
// round-trips bit-exactly.
Image render(const IdentityProfile& id, const PathologyState& state, View view,
             const AffineTransform& jitter, int resolution);
Image render(const IdentityProfile& id, const PathologyState& state, View view, int resolution);

// One sentence per attribute with magnitude >= 0.05 (mild/moderate/large at
// 0.05/0.2/0.5), fixed phrase order; quiet state -> "no acute findings."
std::string describe_findings(const PathologyState& state);

struct ExtractedAttributes {
  PathologyState state;
  double body_width = 0.0;
  double tissue_tone_score = 0.0;  // continuous estimate, ~0..2
  int tissue_tone = 0;             // rounded class
  double age_norm = 0.0;
  double template_ncc = 0.0;
};

// Analytic inverse of the frontal renderer; the evaluation oracle.
// Expects an un-jittered (or registered-to-canonical) frontal image; throws
// extraction-failure when the image does not match the thorax template
// (NCC < 0.3 against the canonical silhouette).
ExtractedAttributes extract_attributes(const Image& img);

// Canonical mid-range frontal silhouette used for the extraction gate.
const Image& canonical_template(int resolution);

// Scene-level geometry shared by the renderer, the extractor and the
// segmentation ground truth. Coordinates are normalized to [0,1]^2.
class FrontalScene {
 public:
  FrontalScene(const IdentityProfile& id, const PathologyState& state);

  double value(double x, double y) const;  // composed intensity before AA

  bool in_thorax(double x, double y) const;
  bool in_heart(double x, double y) const;
  bool in_heart_dilated(double x, double y, double margin) const;
  // side: 0 = patient-right (image-left lung), 1 = patient-left.
  double lung_radius(int side, double x, double y) const;  // normalized, <1 inside
  bool in_lung_region(double x, double y, int* side_out = nullptr) const;
  bool in_rib_band(double x, double y) const;
  double rib_centerline_distance(double x, double y) const;  // vertical distance
  bool in_fluid(int side, double x, double y) const;
  bool in_apex_rim(int side, double x, double y) const;
  bool in_wedge(double x, double y) const;  // atelectasis sector, patient-right lung

  double lung_center_x(int side) const;
  double lung_center_y() const { return 0.52; }
  double lung_ax() const;
  double lung_ay() const { return 0.30; }
  double heart_ax() const;
  double fluid_top(int side) const;

  const IdentityProfile& identity() const { return id_; }
  const PathologyState& state() const { return state_; }

 private:
  IdentityProfile id_;
  PathologyState state_;
};

// Journey persistence: one 8-bit grayscale PNG per study named
// {patient_id}_{time_index}.png plus journeys.jsonl whose first line is a
// header carrying the canvas resolution.
void write_journeys(const std::string& dir, const std::vector<PatientJourney>& journeys,
                    int resolution);
std::vector<PatientJourney> read_journeys(const std::string& dir, int* resolution_out = nullptr);

}  // namespace jb::synthworld
