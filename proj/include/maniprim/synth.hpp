#pragma once

// Scripted synthetic trials for the eight manipulation actions. Each script
// is a list of parameterized primitive events; rendering superposes bells on
// the motion channels and half-bell ramps on the force / bend envelopes, so
// every script also knows the token sequence extraction must recover.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "maniprim/error.hpp"
#include "maniprim/extraction.hpp"
#include "maniprim/profile.hpp"
#include "maniprim/rng.hpp"
#include "maniprim/signals.hpp"
#include "maniprim/tokens.hpp"

namespace maniprim {

enum class EventKind { reach, rotate, grasp_envelope, bend_envelope };

// Envelope plateau targets; `off` is the resting (zero) state.
enum class Plateau { off, low, mid, high };

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  double mid() const { return 0.5 * (lo + hi); }
  double draw(Rng& rng) const { return rng.uniform(lo, hi); }
};

// Where an event starts: `offset` after the end (or start) of event `ref`;
// ref < 0 means the trial start.
enum class Anchor { after_end, after_start };

struct ScriptEvent {
  EventKind kind = EventKind::reach;
  Axis axis = Axis::x;
  int sign = +1;
  Range magnitude;  // m or rad (reach / rotate only)
  Range duration;   // bell duration or envelope ramp time, s
  int ref = -1;
  Anchor anchor = Anchor::after_end;
  Range offset;
  Plateau target = Plateau::off;  // envelopes only
};

struct ActionScript {
  std::string label;
  std::vector<ScriptEvent> events;
  std::vector<std::string> expected;  // ground-truth token names
};

// Envelope plateau values (composite-signal units).
inline double plateau_value(Plateau p) {
  switch (p) {
    case Plateau::off: return 0.0;
    case Plateau::low: return 3.0;
    case Plateau::mid: return 6.0;
    case Plateau::high: return 10.0;
  }
  return 0.0;
}

inline constexpr double kLeadIn = 0.5;
inline constexpr double kTail = 0.6;

struct SubjectParams {
  std::string id;
  double duration_factor = 1.0;
  double magnitude_factor = 1.0;
  double strength_factor = 1.0;
  std::array<double, kPressureChannels> grasp_template{};
  std::array<double, kBendChannels> bend_template{};
};

struct NoiseSigma {
  double velocity = 0.02;  // m/s per channel
  double angular = 0.05;   // rad/s per channel
  // Pressure / bend sigmas are in composite units: per-channel noise is
  // sigma / sqrt(channels), so the noise vector has norm ~ sigma.
  double pressure = 0.0;
  double bend = 0.0;

  static NoiseSigma zero() { return NoiseSigma{0.0, 0.0, 0.0, 0.0}; }
  NoiseSigma scaled(double k) const { return NoiseSigma{velocity * k, angular * k, pressure * k, bend * k}; }
};

namespace detail {

inline ScriptEvent reach(Axis a, int sign, Range mag, Range dur, int ref, Anchor anchor, Range offset) {
  return ScriptEvent{EventKind::reach, a, sign, mag, dur, ref, anchor, offset, Plateau::off};
}
inline ScriptEvent rotate(Axis a, int sign, Range mag, Range dur, int ref, Anchor anchor, Range offset) {
  return ScriptEvent{EventKind::rotate, a, sign, mag, dur, ref, anchor, offset, Plateau::off};
}
inline ScriptEvent envelope(EventKind k, Plateau target, Range ramp, int ref, Range offset) {
  return ScriptEvent{k, Axis::x, +1, {}, ramp, ref, Anchor::after_end, offset, target};
}

inline constexpr Range kGap{0.15, 0.25};
inline constexpr Range kRamp{0.3, 0.4};

struct ScriptBuilder {
  std::vector<ScriptEvent> ev;
  int last() const { return static_cast<int>(ev.size()) - 1; }
  int add(ScriptEvent e) {
    ev.push_back(e);
    return last();
  }
  int approach() { return add(reach(Axis::x, -1, {0.30, 0.40}, {0.9, 1.1}, -1, Anchor::after_end, {0.0, 0.1})); }
  int grasp(Plateau p, int ref) { return add(envelope(EventKind::grasp_envelope, p, kRamp, ref, kGap)); }
  int release(int ref) { return add(envelope(EventKind::grasp_envelope, Plateau::off, kRamp, ref, kGap)); }
  int retrieve(int sign, int ref) {
    return add(reach(Axis::x, sign, {0.25, 0.35}, {0.8, 1.0}, ref, Anchor::after_end, kGap));
  }
};

}  // namespace detail

inline const std::vector<std::string>& action_labels() {
  static const std::vector<std::string> labels{"CloseCabinet", "CloseDrawer", "OpenCabinet", "OpenDrawer",
                                               "PickPlace",    "Pour",        "Spray",       "Stir"};
  return labels;
}

// Plateau-to-level mapping is fixed by the nominal level sets computed from
// the scripts themselves (see nominal_levels()).
inline std::vector<ActionScript> builtin_script_events() {
  using detail::reach;
  using detail::rotate;
  using detail::ScriptBuilder;
  constexpr Range gap = detail::kGap;
  std::vector<ActionScript> out;

  {  // Open Drawer: reach, grasp, pull, release, retrieve.
    ScriptBuilder b;
    b.approach();
    const int g = b.grasp(Plateau::high, b.last());
    const int pull = b.add(reach(Axis::x, +1, {0.25, 0.35}, {0.8, 1.0}, g, Anchor::after_end, gap));
    const int r = b.release(pull);
    b.retrieve(-1, r);
    out.push_back({"OpenDrawer", b.ev, {}});
  }
  {  // Close Drawer: mirror of Open Drawer.
    ScriptBuilder b;
    b.approach();
    const int g = b.grasp(Plateau::high, b.last());
    const int push = b.add(reach(Axis::x, -1, {0.25, 0.35}, {0.8, 1.0}, g, Anchor::after_end, gap));
    const int r = b.release(push);
    b.retrieve(+1, r);
    out.push_back({"CloseDrawer", b.ev, {}});
  }
  {  // Open Cabinet: the pull follows the door arc and turns the wrist.
    ScriptBuilder b;
    b.approach();
    const int g = b.grasp(Plateau::high, b.last());
    const int pull = b.add(reach(Axis::x, +1, {0.25, 0.35}, {0.8, 1.0}, g, Anchor::after_end, gap));
    b.add(reach(Axis::y, +1, {0.20, 0.30}, {0.8, 1.0}, pull, Anchor::after_start, {0.15, 0.25}));
    const int turn = b.add(rotate(Axis::z, +1, {0.9, 1.2}, {0.8, 1.0}, pull, Anchor::after_start, {0.30, 0.40}));
    const int r = b.release(turn);
    b.retrieve(-1, r);
    out.push_back({"OpenCabinet", b.ev, {}});
  }
  {  // Close Cabinet.
    ScriptBuilder b;
    b.approach();
    const int g = b.grasp(Plateau::high, b.last());
    const int push = b.add(reach(Axis::x, -1, {0.25, 0.35}, {0.8, 1.0}, g, Anchor::after_end, gap));
    b.add(reach(Axis::y, -1, {0.20, 0.30}, {0.8, 1.0}, push, Anchor::after_start, {0.15, 0.25}));
    const int turn = b.add(rotate(Axis::z, -1, {0.9, 1.2}, {0.8, 1.0}, push, Anchor::after_start, {0.30, 0.40}));
    const int r = b.release(turn);
    b.retrieve(+1, r);
    out.push_back({"CloseCabinet", b.ev, {}});
  }
  {  // Pick/Place: lift with a lateral carry, set down.
    ScriptBuilder b;
    b.approach();
    const int g = b.grasp(Plateau::high, b.last());
    const int lift = b.add(reach(Axis::z, +1, {0.20, 0.30}, {0.7, 0.9}, g, Anchor::after_end, gap));
    const int carry = b.add(reach(Axis::y, +1, {0.25, 0.35}, {0.8, 1.0}, lift, Anchor::after_start, {0.10, 0.20}));
    const int place = b.add(reach(Axis::z, -1, {0.20, 0.30}, {0.7, 0.9}, carry, Anchor::after_end, {0.10, 0.20}));
    const int r = b.release(place);
    b.retrieve(+1, r);
    out.push_back({"PickPlace", b.ev, {}});
  }
  {  // Spray: medium grip, two trigger squeezes.
    ScriptBuilder b;
    b.approach();
    int prev = b.grasp(Plateau::mid, b.last());
    for (int k = 0; k < 2; ++k) {
      prev = b.add(detail::envelope(EventKind::bend_envelope, Plateau::high, {0.2, 0.3}, prev, {0.2, 0.3}));
      prev = b.add(detail::envelope(EventKind::bend_envelope, Plateau::off, {0.2, 0.3}, prev, {0.2, 0.3}));
    }
    const int r = b.release(prev);
    b.retrieve(+1, r);
    out.push_back({"Spray", b.ev, {}});
  }
  {  // Stir: alternating wrist rotations about the vertical axis.
    ScriptBuilder b;
    b.approach();
    int prev = b.grasp(Plateau::high, b.last());
    for (int k = 0; k < 4; ++k) {
      const int sign = k % 2 == 0 ? +1 : -1;
      prev = b.add(rotate(Axis::z, sign, {0.9, 1.2}, {0.5, 0.7}, prev, Anchor::after_end,
                          k == 0 ? gap : Range{0.05, 0.10}));
    }
    const int r = b.release(prev);
    b.retrieve(+1, r);
    out.push_back({"Stir", b.ev, {}});
  }
  {  // Pour: lift, tilt, hold, untilt, lower.
    ScriptBuilder b;
    b.approach();
    const int g = b.grasp(Plateau::high, b.last());
    const int lift = b.add(reach(Axis::z, +1, {0.15, 0.25}, {0.7, 0.9}, g, Anchor::after_end, gap));
    const int tilt = b.add(rotate(Axis::x, -1, {1.2, 1.6}, {0.8, 1.0}, lift, Anchor::after_end, {0.10, 0.20}));
    const int back = b.add(rotate(Axis::x, +1, {1.2, 1.6}, {0.8, 1.0}, tilt, Anchor::after_end, {0.5, 0.8}));
    const int lower = b.add(reach(Axis::z, -1, {0.15, 0.25}, {0.7, 0.9}, back, Anchor::after_end, {0.10, 0.20}));
    const int r = b.release(lower);
    b.retrieve(+1, r);
    out.push_back({"Pour", b.ev, {}});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.label < b.label; });
  return out;
}

// Levels implied by a label-balanced dataset at unit strength: A is the mean
// over scripts of the highest plateau each script reaches.
inline std::pair<LevelSet, LevelSet> nominal_levels(const std::vector<ActionScript>& scripts) {
  double force = 0.0, bend = 0.0;
  for (const auto& s : scripts) {
    double mf = 0.0, mb = 0.0;
    for (const auto& e : s.events) {
      if (e.kind == EventKind::grasp_envelope) mf = std::max(mf, plateau_value(e.target));
      if (e.kind == EventKind::bend_envelope) mb = std::max(mb, plateau_value(e.target));
    }
    force += mf;
    bend += mb;
  }
  const double n = static_cast<double>(scripts.size());
  return {LevelSet::from_average(force / n), LevelSet::from_average(bend / n)};
}

struct TimedEvent {
  ScriptEvent spec;
  double start = 0.0;
  double duration = 0.0;
  double magnitude = 0.0;
  double target_value = 0.0;  // envelopes: plateau after the ramp
};

namespace detail {

// Deterministic placement of events, drawing each random quantity in event
// order from `rng` (or using range midpoints when rng is null).
inline std::vector<TimedEvent> place_events(const ActionScript& script, const SubjectParams& subject, Rng* rng,
                                            const ExtractionConfig& prune, std::vector<std::string>* warnings) {
  auto draw = [&](const Range& r) { return rng ? r.draw(*rng) : r.mid(); };
  std::vector<TimedEvent> out;
  for (const auto& e : script.events) {
    TimedEvent te;
    te.spec = e;
    te.duration = draw(e.duration) * subject.duration_factor;
    const double offset = draw(e.offset);
    double base = kLeadIn;
    if (e.ref >= 0) {
      const auto& r = out.at(static_cast<std::size_t>(e.ref));
      base = e.anchor == Anchor::after_end ? r.start + r.duration : r.start;
    }
    te.start = base + offset;
    if (e.kind == EventKind::reach || e.kind == EventKind::rotate) {
      const double floor = e.kind == EventKind::reach ? prune.min_reach_magnitude : prune.min_rotate_magnitude;
      double mag = draw(e.magnitude) * subject.magnitude_factor;
      for (int attempt = 0; mag < floor && attempt < 10 && rng; ++attempt)
        mag = draw(e.magnitude) * subject.magnitude_factor;
      if (mag < floor) {
        mag = 1.2 * floor;
        if (warnings) warnings->push_back(script.label + ": event magnitude raised to 1.2x pruning threshold");
      }
      te.magnitude = mag;
    } else {
      const double strength = e.kind == EventKind::grasp_envelope ? subject.strength_factor : 1.0;
      te.target_value = plateau_value(e.target) * strength;
    }
    out.push_back(te);
  }
  return out;
}

// Rising envelope edge follows the first half of the bell, falling edge the
// second half; both are monotone between the two plateaus.
inline double ramp_value(double from, double to, double tau) {
  tau = std::clamp(tau, 0.0, 1.0);
  if (to >= from) return from + (to - from) * min_jerk_speed(0.5 * tau) / kMinJerkPeak;
  return from + (to - from) * (1.0 - min_jerk_speed(0.5 + 0.5 * tau) / kMinJerkPeak);
}

// Envelope value at t from the time-ordered envelope events of one modality.
inline double envelope_at(const std::vector<const TimedEvent*>& env, double t) {
  double level = 0.0;
  for (const auto* e : env) {
    if (t < e->start) break;
    const double tau = (t - e->start) / e->duration;
    if (tau >= 1.0) {
      level = e->target_value;
    } else {
      return ramp_value(level, e->target_value, tau);
    }
  }
  return level;
}

// Time at which a ramp from `from` to `to` starting at t0 passes `value`.
inline double ramp_crossing_time(double from, double to, double t0, double dur, double value) {
  double lo = 0.0, hi = 1.0;
  const bool rising = to > from;
  for (int k = 0; k < 60; ++k) {
    const double m = 0.5 * (lo + hi);
    const double v = ramp_value(from, to, m);
    if ((rising && v < value) || (!rising && v > value)) lo = m;
    else hi = m;
  }
  return t0 + 0.5 * (lo + hi) * dur;
}

// Tokens the placed events should produce against the given level sets.
inline TokenSequence expected_tokens(const std::vector<TimedEvent>& events, const LevelSet& force,
                                     const LevelSet& bend, double strength) {
  TokenSequence toks;
  for (auto [kind, fam, lv, scale] :
       {std::tuple{EventKind::grasp_envelope, Family::grasp_release, force, strength},
        std::tuple{EventKind::bend_envelope, Family::bend_extend, bend, 1.0}}) {
    double level = 0.0;
    for (const auto& e : events) {
      if (e.spec.kind != kind) continue;
      // Level names come from the nominal plateau, so a jittered plateau keeps
      // its symbolic meaning.
      const double nominal = plateau_value(e.spec.target);
      const double from_nominal = scale > 0.0 ? level / scale : 0.0;
      std::vector<Level> crossed;
      for (Level l : {Level::low, Level::mid, Level::high}) {
        const double L = lv.at(l);
        if (nominal > from_nominal && from_nominal < L && L <= nominal) crossed.push_back(l);
        if (nominal < from_nominal && nominal < L && L <= from_nominal) crossed.push_back(l);
      }
      const bool rising = nominal > from_nominal;
      if (!rising) std::reverse(crossed.begin(), crossed.end());
      for (Level l : crossed) {
        const double t = ramp_crossing_time(level, e.target_value, e.start, e.duration, lv.at(l) * scale);
        toks.push_back(Token{{crossing_symbol(fam, rising, l)}, t});
      }
      level = e.target_value;
    }
  }

  // Bells: consecutive concurrent starts merge exactly as in extraction.
  for (EventKind kind : {EventKind::reach, EventKind::rotate}) {
    std::vector<BellInstance> bells;
    for (const auto& e : events) {
      if (e.spec.kind != kind) continue;
      BellInstance b;
      b.channel = static_cast<std::size_t>(e.spec.axis) + (kind == EventKind::rotate ? 3 : 0);
      b.params = BellParams{e.spec.axis, e.spec.sign, e.magnitude, e.start, e.duration};
      bells.push_back(b);
    }
    for (auto& t : merge_concurrent(bells, kind == EventKind::reach ? Family::reach : Family::rotate))
      toks.push_back(std::move(t));
  }
  std::stable_sort(toks.begin(), toks.end(), [](const Token& a, const Token& b) {
    if (a.t_s != b.t_s) return a.t_s < b.t_s;
    return a.name() < b.name();
  });
  return toks;
}

}  // namespace detail

inline SubjectParams default_subject(std::string id = "s0") {
  SubjectParams s;
  s.id = std::move(id);
  s.grasp_template.fill(1.0 / std::sqrt(static_cast<double>(kPressureChannels)));
  s.bend_template.fill(1.0 / std::sqrt(static_cast<double>(kBendChannels)));
  return s;
}

// Subject factors are uniform in [1 - jitter, 1 + jitter]; jitter <= 0.3.
inline SubjectParams draw_subject(std::string id, double jitter, Rng& rng) {
  jitter = std::clamp(jitter, 0.0, 0.3);
  SubjectParams s;
  s.id = std::move(id);
  s.duration_factor = rng.uniform(1.0 - jitter, 1.0 + jitter);
  s.magnitude_factor = rng.uniform(1.0 - jitter, 1.0 + jitter);
  s.strength_factor = rng.uniform(1.0 - jitter, 1.0 + jitter);
  auto unit_template = [&](auto& tpl) {
    double n = 0.0;
    for (auto& x : tpl) {
      x = rng.uniform(0.2, 1.0);
      n += x * x;
    }
    for (auto& x : tpl) x /= std::sqrt(n);
  };
  unit_template(s.grasp_template);
  unit_template(s.bend_template);
  return s;
}

// Subjects at the edges of the jitter box: every factor is 1 +/- jitter.
inline SubjectParams extreme_subject(std::string id, double jitter, Rng& rng) {
  SubjectParams s = draw_subject(std::move(id), jitter, rng);
  auto edge = [&] { return rng.uniform() < 0.5 ? 1.0 - jitter : 1.0 + jitter; };
  s.duration_factor = edge();
  s.magnitude_factor = edge();
  s.strength_factor = edge();
  return s;
}

// Scripts with their expected token sequences filled in.
inline std::vector<ActionScript> builtin_scripts() {
  auto scripts = builtin_script_events();
  const auto [force, bend] = nominal_levels(scripts);
  const SubjectParams subject = default_subject();
  for (auto& s : scripts) {
    const auto placed = detail::place_events(s, subject, nullptr, ExtractionConfig{}, nullptr);
    s.expected = token_names(detail::expected_tokens(placed, force, bend, 1.0));
  }
  return scripts;
}

inline NoiseSigma default_noise() {
  const auto [force, bend] = nominal_levels(builtin_script_events());
  return NoiseSigma{0.02, 0.05, 0.02 * force.A, 0.02 * bend.A};
}

struct RenderedTrial {
  Trial trial;
  TokenSequence truth;
  std::vector<std::string> warnings;
};

inline RenderedTrial render_trial(const ActionScript& script, const SubjectParams& subject, const NoiseSigma& noise,
                                  double rate, std::uint64_t seed, const std::string& trial_id = "trial") {
  if (!(rate >= 20.0)) throw ArgumentError("render_trial: rate must be >= 20 Hz");
  Rng rng(seed);
  RenderedTrial out;
  const auto events = detail::place_events(script, subject, &rng, ExtractionConfig{}, &out.warnings);

  double end = 0.0;
  std::vector<const TimedEvent*> force_env, bend_env;
  for (const auto& e : events) {
    end = std::max(end, e.start + e.duration);
    if (e.spec.kind == EventKind::grasp_envelope) force_env.push_back(&e);
    if (e.spec.kind == EventKind::bend_envelope) bend_env.push_back(&e);
  }
  auto by_start = [](const TimedEvent* a, const TimedEvent* b) { return a->start < b->start; };
  std::stable_sort(force_env.begin(), force_env.end(), by_start);
  std::stable_sort(bend_env.begin(), bend_env.end(), by_start);
  end += kTail;

  const ProfileModel model = ProfileModel::min_jerk();
  const auto last = static_cast<std::size_t>(std::ceil(end * rate));
  Trial& trial = out.trial;
  trial.id = trial_id;
  trial.subject = subject.id;
  trial.action_label = script.label;
  trial.rate = rate;
  trial.frames.resize(last + 1);
  const double fsd = noise.pressure / std::sqrt(static_cast<double>(kPressureChannels));
  const double bsd = noise.bend / std::sqrt(static_cast<double>(kBendChannels));
  for (std::size_t k = 0; k <= last; ++k) {
    Frame& f = trial.frames[k];
    f.t = static_cast<double>(k) / rate;
    for (const auto& e : events) {
      if (e.spec.kind != EventKind::reach && e.spec.kind != EventKind::rotate) continue;
      const BellParams p{e.spec.axis, e.spec.sign, e.magnitude, e.start, e.duration};
      const double v = bell_value(p, model, f.t);
      auto& ch = e.spec.kind == EventKind::reach ? f.v : f.w;
      ch[static_cast<std::size_t>(e.spec.axis)] += v;
    }
    for (std::size_t c = 0; c < 3; ++c) {
      if (noise.velocity > 0.0) f.v[c] += rng.normal(0.0, noise.velocity);
      if (noise.angular > 0.0) f.w[c] += rng.normal(0.0, noise.angular);
    }
    const double ef = detail::envelope_at(force_env, f.t);
    const double eb = detail::envelope_at(bend_env, f.t);
    for (std::size_t c = 0; c < kPressureChannels; ++c) {
      double x = ef * subject.grasp_template[c];
      if (fsd > 0.0) x += rng.normal(0.0, fsd);
      f.F[c] = std::max(x, 0.0);
    }
    for (std::size_t c = 0; c < kBendChannels; ++c) {
      double x = eb * subject.bend_template[c];
      if (bsd > 0.0) x += rng.normal(0.0, bsd);
      f.b[c] = std::max(x, 0.0);
    }
  }

  const auto [force, bend] = nominal_levels(builtin_script_events());
  out.truth = detail::expected_tokens(events, force, bend, subject.strength_factor);
  return out;
}

struct DatasetConfig {
  std::size_t n_subjects = 5;
  std::size_t trials_per_action = 6;
  NoiseSigma noise = default_noise();
  double jitter = 0.1;
  bool extreme_subjects = false;
  double rate = kDefaultRate;
  std::uint64_t seed = 1;
};

struct DatasetItem {
  Trial trial;
  std::vector<std::string> truth;
  std::uint64_t seed = 0;
};

struct Dataset {
  DatasetConfig config;
  std::vector<SubjectParams> subjects;
  std::vector<DatasetItem> items;
  std::vector<std::string> warnings;
};

inline Dataset generate_dataset(const DatasetConfig& cfg) {
  if (cfg.n_subjects < 2) throw ArgumentError("generate_dataset: need at least 2 subjects");
  Dataset ds;
  ds.config = cfg;
  Rng subject_rng(derive_seed(cfg.seed, 0x5ab1ec75ULL));
  for (std::size_t s = 0; s < cfg.n_subjects; ++s) {
    const std::string id = "s" + std::to_string(s + 1);
    ds.subjects.push_back(cfg.extreme_subjects ? extreme_subject(id, cfg.jitter, subject_rng)
                                               : draw_subject(id, cfg.jitter, subject_rng));
  }
  const auto scripts = builtin_scripts();
  std::uint64_t index = 0;
  for (const auto& subject : ds.subjects) {
    for (const auto& script : scripts) {
      for (std::size_t r = 0; r < cfg.trials_per_action; ++r) {
        const std::uint64_t seed = derive_seed(cfg.seed, ++index);
        const std::string id = subject.id + "-" + script.label + "-" + std::to_string(r + 1);
        auto rt = render_trial(script, subject, cfg.noise, cfg.rate, seed, id);
        for (auto& w : rt.warnings) ds.warnings.push_back(id + ": " + w);
        ds.items.push_back({std::move(rt.trial), token_names(rt.truth), seed});
      }
    }
  }
  return ds;
}

// manifest.tsv columns: trial_id, subject, action, seed, truth.
struct ManifestRow {
  std::string trial_id;
  std::string subject;
  std::string action;
  std::uint64_t seed = 0;
  std::vector<std::string> truth;
};

inline constexpr const char* kManifestHeader = "trial_id\tsubject\taction\tseed\ttruth";

inline std::string manifest_to_text(const std::vector<ManifestRow>& rows) {
  std::string out = std::string(kManifestHeader) + "\n";
  for (const auto& r : rows)
    out += r.trial_id + "\t" + r.subject + "\t" + r.action + "\t" + std::to_string(r.seed) + "\t" +
           join_tokens(r.truth) + "\n";
  return out;
}

inline std::vector<ManifestRow> load_manifest(const std::string& path) {
  const auto all = text::lines(text::read_file(path));
  if (all.empty() || all[0] != kManifestHeader) throw SchemaError(path + ": bad manifest header");
  std::vector<ManifestRow> rows;
  for (std::size_t i = 1; i < all.size(); ++i) {
    if (all[i].empty()) continue;
    const auto f = text::split(all[i], '\t');
    if (f.size() != 5) throw SchemaError(path + ": manifest row " + std::to_string(i) + " needs 5 fields");
    ManifestRow r{f[0], f[1], f[2], std::stoull(f[3]), {}};
    for (const auto& t : text::split(f[4], ' '))
      if (!t.empty()) r.truth.push_back(t);
    rows.push_back(std::move(r));
  }
  return rows;
}

// Writes <dir>/<trial_id>.csv (+ .meta) per trial and <dir>/manifest.tsv.
inline void write_dataset(const Dataset& ds, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  std::vector<ManifestRow> rows;
  for (const auto& item : ds.items) {
    save_trial(item.trial, (dir / (item.trial.id + ".csv")).string());
    rows.push_back({item.trial.id, item.trial.subject, item.trial.action_label.value_or(""), item.seed, item.truth});
  }
  text::write_file((dir / "manifest.tsv").string(), manifest_to_text(rows));
}

}  // namespace maniprim
