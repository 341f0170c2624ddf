#pragma once

// Multi-modal recordings: frames, trials, scalar series, and the ingest /
// resample / composite / smoothing operations applied before extraction.

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "maniprim/error.hpp"
#include "maniprim/text.hpp"

namespace maniprim {

inline constexpr std::size_t kPressureChannels = 18;
inline constexpr std::size_t kBendChannels = 8;
inline constexpr double kDefaultRate = 50.0;

// One sample of every modality. v: m/s (x toward/away from body, y lateral,
// z vertical); w: rad/s about the hand axes; F, b: raw sensor units, >= 0.
struct Frame {
  double t = 0.0;
  std::array<double, 3> v{};
  std::array<double, 3> w{};
  std::array<double, kPressureChannels> F{};
  std::array<double, kBendChannels> b{};
};

struct Trial {
  std::string id;
  std::string subject;
  std::optional<std::string> action_label;
  std::vector<Frame> frames;
  double rate = kDefaultRate;

  double duration() const {
    return frames.empty() ? 0.0 : frames.back().t - frames.front().t;
  }
};

// Uniformly sampled scalar signal.
struct Series {
  double t0 = 0.0;
  double rate = kDefaultRate;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double time(std::size_t i) const { return t0 + static_cast<double>(i) / rate; }
  double dt() const { return 1.0 / rate; }
};

enum class ChannelGroup { pressure, bend };

// Column names of the trial-CSV schema, in canonical order.
inline const std::vector<std::string>& trial_csv_columns() {
  static const std::vector<std::string> cols = [] {
    std::vector<std::string> c{"t", "vx", "vy", "vz", "wx", "wy", "wz"};
    for (std::size_t i = 1; i <= kPressureChannels; ++i) c.push_back("F" + std::to_string(i));
    for (std::size_t i = 1; i <= kBendChannels; ++i) c.push_back("b" + std::to_string(i));
    return c;
  }();
  return cols;
}

namespace detail {

// Column index 0 is t; 1..32 follow trial_csv_columns() order.
inline double& channel_ref(Frame& f, std::size_t col) {
  if (col == 0) return f.t;
  if (col <= 3) return f.v[col - 1];
  if (col <= 6) return f.w[col - 4];
  if (col <= 6 + kPressureChannels) return f.F[col - 7];
  return f.b[col - 7 - kPressureChannels];
}

inline double channel_value(const Frame& f, std::size_t col) {
  return channel_ref(const_cast<Frame&>(f), col);
}

inline constexpr std::size_t kAllColumns = 1 + 3 + 3 + kPressureChannels + kBendChannels;

// Parses a CSV whose header must contain exactly `wanted` (any order).
// Returns rows as vectors ordered like `wanted`.
inline std::vector<std::vector<double>> read_named_csv(const std::string& path,
                                                       const std::vector<std::string>& wanted) {
  const auto all = text::lines(text::read_file(path));
  if (all.empty()) throw SchemaError(path + ": empty file, missing header");
  const auto header = text::split(all[0], ',');
  std::map<std::string, std::size_t> pos;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string name(text::trim(header[i]));
    if (pos.count(name)) throw SchemaError(path + ": duplicate column '" + name + "'");
    pos[name] = i;
  }
  std::vector<std::size_t> src(wanted.size());
  for (std::size_t k = 0; k < wanted.size(); ++k) {
    auto it = pos.find(wanted[k]);
    if (it == pos.end()) throw SchemaError(path + ": missing column '" + wanted[k] + "'");
    src[k] = it->second;
  }
  if (header.size() != wanted.size()) {
    for (const auto& [name, idx] : pos) {
      if (std::find(wanted.begin(), wanted.end(), name) == wanted.end())
        throw SchemaError(path + ": unexpected column '" + name + "'");
    }
  }

  std::vector<std::vector<double>> rows;
  for (std::size_t li = 1; li < all.size(); ++li) {
    if (text::trim(all[li]).empty()) continue;
    const std::size_t row = rows.size() + 1;
    const auto cells = text::split(all[li], ',');
    if (cells.size() != header.size())
      throw SchemaError(path + ": row " + std::to_string(row) + " has " +
                        std::to_string(cells.size()) + " fields, expected " +
                        std::to_string(header.size()));
    std::vector<double> r(wanted.size());
    for (std::size_t k = 0; k < wanted.size(); ++k) {
      auto v = text::parse_double(cells[src[k]]);
      if (!v) throw ValueError(path + ": unparsable value at row " + std::to_string(row) +
                                   ", column " + wanted[k], row, wanted[k]);
      if (!std::isfinite(*v))
        throw ValueError(path + ": non-finite value at row " + std::to_string(row) +
                             ", column " + wanted[k], row, wanted[k]);
      r[k] = *v;
    }
    if (!rows.empty() && !(r[0] > rows.back()[0]))
      throw OrderingError(path + ": timestamps not strictly increasing at row " +
                              std::to_string(row), row);
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw SchemaError(path + ": no data rows");
  return rows;
}

inline double infer_rate(const std::vector<Frame>& frames) {
  if (frames.size() < 2) return kDefaultRate;
  return static_cast<double>(frames.size() - 1) / (frames.back().t - frames.front().t);
}

// Linear interpolation of column-major samples at time t, clamped at the ends.
inline double interp(std::span<const double> ts, std::span<const double> ys, double t) {
  if (t <= ts.front()) return ys.front();
  if (t >= ts.back()) return ys.back();
  const auto it = std::upper_bound(ts.begin(), ts.end(), t);
  const std::size_t j = static_cast<std::size_t>(it - ts.begin());
  const double a = (t - ts[j - 1]) / (ts[j] - ts[j - 1]);
  return ys[j - 1] + a * (ys[j] - ys[j - 1]);
}

}  // namespace detail

// Sidecar metadata for `x.csv` lives in `x.meta` (key=value lines).
inline std::filesystem::path metadata_path(const std::filesystem::path& csv) {
  auto p = csv;
  p.replace_extension(".meta");
  return p;
}

inline Trial load_trial(const std::string& path) {
  const auto rows = detail::read_named_csv(path, trial_csv_columns());
  Trial trial;
  trial.frames.resize(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < detail::kAllColumns; ++c) {
      if (c >= 7 && rows[r][c] < 0.0)
        throw ValueError(path + ": negative sensor value at row " + std::to_string(r + 1) +
                             ", column " + trial_csv_columns()[c],
                         r + 1, trial_csv_columns()[c]);
      detail::channel_ref(trial.frames[r], c) = rows[r][c];
    }
  }
  trial.rate = detail::infer_rate(trial.frames);
  trial.id = std::filesystem::path(path).stem().string();

  const auto meta = metadata_path(path);
  if (std::filesystem::exists(meta)) {
    for (const auto& line : text::lines(text::read_file(meta.string()))) {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key(text::trim(std::string_view(line).substr(0, eq)));
      const std::string val(text::trim(std::string_view(line).substr(eq + 1)));
      if (key == "id") trial.id = val;
      else if (key == "subject") trial.subject = val;
      else if (key == "action" && !val.empty()) trial.action_label = val;
    }
  }
  return trial;
}

// Merges separately recorded modality streams onto the pressure-stream grid.
// motion: t,vx,vy,vz,wx,wy,wz   pressure: t,F1..F18   bend: t,b1..b8
inline Trial load_trial_modalities(const std::string& motion_path, const std::string& pressure_path,
                                   const std::string& bend_path) {
  const auto& cols = trial_csv_columns();
  const std::vector<std::string> motion_cols(cols.begin(), cols.begin() + 7);
  std::vector<std::string> pressure_cols{"t"};
  pressure_cols.insert(pressure_cols.end(), cols.begin() + 7, cols.begin() + 7 + kPressureChannels);
  std::vector<std::string> bend_cols{"t"};
  bend_cols.insert(bend_cols.end(), cols.begin() + 7 + kPressureChannels, cols.end());

  const auto motion = detail::read_named_csv(motion_path, motion_cols);
  const auto pressure = detail::read_named_csv(pressure_path, pressure_cols);
  const auto bend = detail::read_named_csv(bend_path, bend_cols);

  auto column = [](const std::vector<std::vector<double>>& rows, std::size_t c) {
    std::vector<double> out(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) out[r] = rows[r][c];
    return out;
  };
  const auto mt = column(motion, 0);
  const auto bt = column(bend, 0);

  Trial trial;
  trial.id = std::filesystem::path(pressure_path).stem().string();
  trial.frames.resize(pressure.size());
  std::vector<std::vector<double>> mcols, bcols;
  for (std::size_t c = 1; c < 7; ++c) mcols.push_back(column(motion, c));
  for (std::size_t c = 1; c <= kBendChannels; ++c) bcols.push_back(column(bend, c));
  for (std::size_t r = 0; r < pressure.size(); ++r) {
    Frame& f = trial.frames[r];
    f.t = pressure[r][0];
    for (std::size_t c = 0; c < kPressureChannels; ++c) {
      if (pressure[r][c + 1] < 0.0)
        throw ValueError(pressure_path + ": negative pressure at row " + std::to_string(r + 1),
                         r + 1, pressure_cols[c + 1]);
      f.F[c] = pressure[r][c + 1];
    }
    for (std::size_t c = 0; c < 3; ++c) {
      f.v[c] = detail::interp(mt, mcols[c], f.t);
      f.w[c] = detail::interp(mt, mcols[c + 3], f.t);
    }
    for (std::size_t c = 0; c < kBendChannels; ++c) {
      const double val = detail::interp(bt, bcols[c], f.t);
      if (val < 0.0) throw ValueError(bend_path + ": negative bend value", 0, bend_cols[c + 1]);
      f.b[c] = val;
    }
  }
  trial.rate = detail::infer_rate(trial.frames);
  return trial;
}

inline std::string trial_to_csv(const Trial& trial) {
  std::string out;
  const auto& cols = trial_csv_columns();
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (c) out += ',';
    out += cols[c];
  }
  out += '\n';
  for (const auto& f : trial.frames) {
    for (std::size_t c = 0; c < detail::kAllColumns; ++c) {
      if (c) out += ',';
      out += text::fmt(detail::channel_value(f, c));
    }
    out += '\n';
  }
  return out;
}

inline void save_trial(const Trial& trial, const std::string& path) {
  text::write_file(path, trial_to_csv(trial));
  std::string meta = "id=" + trial.id + "\nsubject=" + trial.subject + "\n";
  if (trial.action_label) meta += "action=" + *trial.action_label + "\n";
  text::write_file(metadata_path(path).string(), meta);
}

// Linear interpolation of every channel onto t_first + k/rate.
inline Trial resample(const Trial& trial, double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate)) throw ArgumentError("resample: rate must be > 0");
  if (trial.frames.empty()) throw ArgumentError("resample: empty trial");

  const auto& src = trial.frames;
  const double t0 = src.front().t;
  const double t1 = src.back().t;
  const double span = t1 - t0;
  const auto last = static_cast<std::size_t>(std::floor(span * rate + 1e-9));

  Trial out = trial;
  out.rate = rate;
  out.frames.assign(last + 1, Frame{});
  std::size_t j = 0;
  for (std::size_t k = 0; k <= last; ++k) {
    double t = t0 + static_cast<double>(k) / rate;
    if (k == last && std::abs(t - t1) < 1e-9) t = t1;
    while (j + 1 < src.size() && src[j + 1].t <= t) ++j;
    Frame& f = out.frames[k];
    if (j + 1 >= src.size() || src[j].t == t) {
      f = src[j];
    } else {
      const Frame& a = src[j];
      const Frame& b = src[j + 1];
      const double alpha = (t - a.t) / (b.t - a.t);
      for (std::size_t c = 1; c < detail::kAllColumns; ++c) {
        const double va = detail::channel_value(a, c);
        const double vb = detail::channel_value(b, c);
        detail::channel_ref(f, c) = va + alpha * (vb - va);
      }
    }
    f.t = t;
  }
  return out;
}

inline double group_norm(const Frame& f, ChannelGroup group) {
  double acc = 0.0;
  if (group == ChannelGroup::pressure) {
    for (double x : f.F) acc += x * x;
  } else {
    for (double x : f.b) acc += x * x;
  }
  return std::sqrt(acc);
}

// Euclidean norm per frame over one channel group (the composite signal).
inline Series composite_norm(const Trial& trial, ChannelGroup group) {
  Series s;
  s.t0 = trial.frames.empty() ? 0.0 : trial.frames.front().t;
  s.rate = trial.rate;
  s.values.reserve(trial.frames.size());
  for (const auto& f : trial.frames) s.values.push_back(group_norm(f, group));
  return s;
}

// Per-frame series of one motion channel: 0..2 = v, 3..5 = w.
inline Series motion_channel(const Trial& trial, std::size_t channel) {
  Series s;
  s.t0 = trial.frames.empty() ? 0.0 : trial.frames.front().t;
  s.rate = trial.rate;
  s.values.reserve(trial.frames.size());
  for (const auto& f : trial.frames) s.values.push_back(channel < 3 ? f.v[channel] : f.w[channel - 3]);
  return s;
}

// Centered moving average; near the edges the window shrinks symmetrically.
inline Series smooth(const Series& series, std::size_t window) {
  if (window == 0 || window % 2 == 0) throw ArgumentError("smooth: window must be odd and >= 1");
  if (window > series.size()) throw ArgumentError("smooth: window larger than series");
  const std::size_t n = series.size();
  const std::size_t h = window / 2;
  Series out = series;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t half = std::min({h, i, n - 1 - i});
    const std::size_t lo = i - half;
    const std::size_t hi = i + half + 1;
    if (half == 0) {
      out.values[i] = series.values[i];
    } else {
      double acc = 0.0;
      for (std::size_t k = lo; k < hi; ++k) acc += series.values[k];
      out.values[i] = acc / static_cast<double>(hi - lo);
    }
  }
  return out;
}

}  // namespace maniprim
