#pragma once

#include "dsq/pulses.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dsq {

/// Text of a pulse-sequence (.seq) file. Comments start with '#'.
struct SequenceSource {
  std::string text;
  std::string name = "<input>";
};

struct ParseDiagnostic {
  enum class Severity { Error, Warning };
  int line = 0;    // 1-based
  int column = 0;  // 1-based
  std::string message;
  Severity severity = Severity::Error;
};

/// Either a schedule (possibly with warnings) or at least one error.
struct ParseResult {
  std::optional<Schedule> schedule;
  std::vector<ParseDiagnostic> diagnostics;

  bool ok() const { return schedule.has_value(); }
  bool has_errors() const;
};

/// Statements, one per line:
///   set B = 9.8G | set rf_mode = single_plus
///   mw plus|minus|clock pi|pi/2|dur=<time> rabi=<freq> [phase=<angle>]
///   stirap enter|exit tw=<time> toff=<time> peak=<freq>
///   hold <time> [mw=<freq>] [{ rf ... }]
///   rf pi|pi/2|dur=<time> rabi=<freq> phase=<angle> [detune=<freq>] [at=<time>]
///   measure
/// Frequencies are ordinary frequencies (Hz, kHz, MHz).
ParseResult parse(const SequenceSource& src);

/// Inverse of parse: parse(serialize(s)) reproduces the control dump of s.
/// Throws ValidationError for segments the language cannot express.
std::string serialize(const Schedule& schedule);

/// "file:line:col: error: message"
std::string format_diagnostic(const ParseDiagnostic& d, const std::string& file_name);

}  // namespace dsq
