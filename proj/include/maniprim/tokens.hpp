#pragma once

// The 24-symbol primitive-feature alphabet, compound tokens, and the
// one-line-per-trial sequence file format.

#include <algorithm>
#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "maniprim/error.hpp"
#include "maniprim/profile.hpp"
#include "maniprim/text.hpp"

namespace maniprim {

enum class Level { low = 0, mid = 1, high = 2 };

inline char level_char(Level l) { return "lmh"[static_cast<int>(l)]; }

enum class Family { reach, rotate, grasp_release, bend_extend };

inline const std::array<std::string, 24>& base_symbols() {
  static const std::array<std::string, 24> s{
      "Vx+", "Vx-", "Vy+", "Vy-", "Vz+", "Vz-", "Wx+", "Wx-", "Wy+", "Wy-", "Wz+", "Wz-",
      "Gl",  "Gm",  "Gh",  "Rl",  "Rm",  "Rh",  "Bl",  "Bm",  "Bh",  "El",  "Em",  "Eh"};
  return s;
}

inline bool is_base_symbol(std::string_view s) {
  const auto& all = base_symbols();
  return std::find(all.begin(), all.end(), s) != all.end();
}

inline std::string motion_symbol(Family family, Axis axis, int sign) {
  std::string s;
  s += family == Family::rotate ? 'W' : 'V';
  s += axis_char(axis);
  s += sign > 0 ? '+' : '-';
  return s;
}

inline std::string crossing_symbol(Family family, bool rising, Level level) {
  char head = 0;
  if (family == Family::grasp_release) head = rising ? 'G' : 'R';
  else head = rising ? 'B' : 'E';
  return std::string{head, level_char(level)};
}

inline Family symbol_family(std::string_view s) {
  switch (s.at(0)) {
    case 'V': return Family::reach;
    case 'W': return Family::rotate;
    case 'G':
    case 'R': return Family::grasp_release;
    default: return Family::bend_extend;
  }
}

// One element of a token sequence: 1-3 base symbols in byte-wise ascending
// order, plus the start time of the earliest member event.
struct Token {
  std::vector<std::string> symbols;
  double t_s = 0.0;

  std::string name() const {
    std::string out;
    for (std::size_t i = 0; i < symbols.size(); ++i) {
      if (i) out += '&';
      out += symbols[i];
    }
    return out;
  }

  bool operator==(const Token&) const = default;
};

inline Token make_token(std::vector<std::string> symbols, double t_s) {
  std::sort(symbols.begin(), symbols.end());
  return Token{std::move(symbols), t_s};
}

using TokenSequence = std::vector<Token>;

inline std::vector<std::string> token_names(const TokenSequence& seq) {
  std::vector<std::string> out;
  out.reserve(seq.size());
  for (const auto& t : seq) out.push_back(t.name());
  return out;
}

inline std::string join_tokens(const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out += ' ';
    out += names[i];
  }
  return out;
}

// Validates a token string against the canonical grammar.
inline bool is_canonical_token(std::string_view tok) {
  const auto parts = text::split(tok, '&');
  if (parts.empty() || parts.size() > 3) return false;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (!is_base_symbol(parts[i])) return false;
    if (i > 0 && !(parts[i - 1] < parts[i])) return false;
  }
  if (parts.size() > 1) {
    const Family f = symbol_family(parts[0]);
    if (f != Family::reach && f != Family::rotate) return false;
    for (const auto& p : parts) {
      if (symbol_family(p) != f) return false;
    }
    for (std::size_t i = 1; i < parts.size(); ++i)
      for (std::size_t j = 0; j < i; ++j)
        if (parts[i][1] == parts[j][1]) return false;
  }
  return true;
}

// One line of a sequence file: "trial_id,subject,action<TAB>tok tok ...".
struct SequenceRecord {
  std::string trial_id;
  std::string subject;
  std::string action;
  std::vector<std::string> tokens;
};

inline std::string format_sequence_line(const SequenceRecord& r) {
  return r.trial_id + "," + r.subject + "," + r.action + "\t" + join_tokens(r.tokens);
}

inline SequenceRecord parse_sequence_line(const std::string& line, std::size_t lineno = 0) {
  const auto tab = line.find('\t');
  if (tab == std::string::npos)
    throw SchemaError("sequence line " + std::to_string(lineno) + ": missing TAB separator");
  const auto head = text::split(std::string_view(line).substr(0, tab), ',');
  if (head.size() != 3)
    throw SchemaError("sequence line " + std::to_string(lineno) + ": expected trial_id,subject,action");
  SequenceRecord r{head[0], head[1], head[2], {}};
  const std::string_view body = std::string_view(line).substr(tab + 1);
  for (const auto& tok : text::split(body, ' ')) {
    if (tok.empty()) continue;
    if (!is_canonical_token(tok))
      throw SchemaError("sequence line " + std::to_string(lineno) + ": non-canonical token '" + tok + "'");
    r.tokens.push_back(tok);
  }
  return r;
}

inline std::vector<SequenceRecord> load_sequences(const std::string& path) {
  std::vector<SequenceRecord> out;
  std::size_t n = 0;
  for (const auto& line : text::lines(text::read_file(path))) {
    ++n;
    if (line.empty()) continue;
    out.push_back(parse_sequence_line(line, n));
  }
  return out;
}

inline std::string sequences_to_text(const std::vector<SequenceRecord>& records) {
  std::string out;
  for (const auto& r : records) out += format_sequence_line(r) + "\n";
  return out;
}

}  // namespace maniprim
