#include "dsq/seqlang.hpp"

#include "dsq/errors.hpp"

#include <cmath>
#include <sstream>

namespace dsq {
namespace {

struct Token {
  std::string text;
  int line = 0;
  int col = 0;
  bool eol = false;
};

// Word after merging "key", "=", "value" pieces into one.
struct Word {
  std::string text;
  int line = 0;
  int col = 0;
};

struct Failure {
  int line;
  int col;
  std::string message;
};

std::vector<Token> lex(const std::string& text) {
  std::vector<Token> out;
  int line = 1, col = 1;
  Token cur;
  auto flush = [&] {
    if (!cur.text.empty()) out.push_back(cur);
    cur = Token{};
  };
  bool comment = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const unsigned char c = static_cast<unsigned char>(text[i]);
    if (c == '\n') {
      flush();
      out.push_back(Token{"", line, col, true});
      ++line;
      col = 1;
      comment = false;
      continue;
    }
    if (!comment) {
      if (c == '#') {
        flush();
        comment = true;
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v') {
        flush();
      } else if (c == '{' || c == '}') {
        flush();
        out.push_back(Token{std::string(1, static_cast<char>(c)), line, col, false});
      } else {
        if (cur.text.empty()) {
          cur.line = line;
          cur.col = col;
        }
        cur.text.push_back(static_cast<char>(c));
      }
    }
    // columns count code points, not UTF-8 continuation bytes
    if ((c & 0xC0) != 0x80) ++col;
  }
  flush();
  out.push_back(Token{"", line, col, true});
  return out;
}

bool close_to(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

class Parser {
 public:
  explicit Parser(const std::string& text) : toks_(lex(text)) {}

  ParseResult run() {
    while (!at_end()) {
      if (peek().eol) {
        ++pos_;
        continue;
      }
      const bool block_before = in_block_;
      try {
        statement();
      } catch (const Failure& f) {
        error(f.line, f.col, f.message);
        recover(block_before || in_block_);
      } catch (const ValidationError& e) {
        error(stmt_line_, stmt_col_, e.what());
        recover(block_before || in_block_);
      }
      in_block_ = false;
    }
    ParseResult r;
    r.diagnostics = std::move(diags_);
    if (!failed_) {
      sched_.settings().b_field = b_field_set_ ? std::optional<double>(b_field_) : std::nullopt;
      if (mode_set_) sched_.settings().rf_mode = mode_;
      r.schedule = std::move(sched_);
    }
    return r;
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::vector<ParseDiagnostic> diags_;
  bool failed_ = false;
  Schedule sched_;
  bool measured_ = false;
  bool in_block_ = false;
  double b_field_ = 9.80;
  bool b_field_set_ = false;
  RfMode mode_ = RfMode::SinglePlus;
  bool mode_set_ = false;
  int stmt_line_ = 1;
  int stmt_col_ = 1;
  // dressing amplitude (Hz) at the end of the previous segment, if it dresses
  std::optional<double> dressing_hz_;
  bool after_stirap_enter_ = false;

  bool at_end() const { return pos_ >= toks_.size(); }
  const Token& peek() const { return toks_[std::min(pos_, toks_.size() - 1)]; }

  void error(int line, int col, std::string msg) {
    diags_.push_back({line, col, std::move(msg), ParseDiagnostic::Severity::Error});
    failed_ = true;
  }
  void warning(int line, int col, std::string msg) {
    diags_.push_back({line, col, std::move(msg), ParseDiagnostic::Severity::Warning});
  }

  void recover(bool inside_block) {
    for (;;) {
      if (inside_block) {
        while (!at_end() && peek().text != "}") ++pos_;
        if (!at_end()) ++pos_;
        inside_block = false;
      }
      while (!at_end() && !peek().eol && peek().text != "{") ++pos_;
      if (at_end() || peek().eol) return;
      inside_block = true;
    }
  }

  // Words up to the end of the line or a brace.
  std::vector<Word> words() {
    std::vector<Word> out;
    while (!at_end() && !peek().eol && peek().text != "{" && peek().text != "}") {
      const Token& t = toks_[pos_++];
      const bool join = !out.empty() && (out.back().text.back() == '=' || t.text.front() == '=');
      if (join) {
        out.back().text += t.text;
      } else {
        out.push_back({t.text, t.line, t.col});
      }
    }
    return out;
  }

  void expect_eol() {
    if (!at_end() && !peek().eol) {
      throw Failure{peek().line, peek().col, "unexpected '" + peek().text + "'"};
    }
  }

  static std::pair<std::string, std::string> split_option(const Word& w) {
    const auto eq = w.text.find('=');
    if (eq == std::string::npos) return {w.text, ""};
    return {w.text.substr(0, eq), w.text.substr(eq + 1)};
  }

  static double value_of(const Word& w, std::size_t offset, Dimension dim) {
    const std::string_view text = std::string_view(w.text).substr(offset);
    const QuantityParse q = parse_quantity(text, dim);
    const int col = w.col + static_cast<int>(offset);
    if (!q.quantity) throw Failure{w.line, col + static_cast<int>(q.error_offset), q.error};
    if (!std::isfinite(q.quantity->value)) throw Failure{w.line, col, "value must be finite"};
    return q.quantity->value;
  }

  static double option_value(const Word& w, Dimension dim) {
    const auto eq = w.text.find('=');
    if (eq + 1 >= w.text.size()) {
      throw Failure{w.line, w.col + static_cast<int>(eq) + 1, "missing value after '='"};
    }
    return value_of(w, eq + 1, dim);
  }

  struct Options {
    std::vector<std::pair<std::string, Word>> found;
    const Word* get(const std::string& key) const {
      for (const auto& [k, w] : found) {
        if (k == key) return &w;
      }
      return nullptr;
    }
  };

  static Options options(const std::vector<Word>& ws, std::size_t from,
                         std::initializer_list<std::string_view> allowed) {
    Options o;
    for (std::size_t i = from; i < ws.size(); ++i) {
      auto [key, value] = split_option(ws[i]);
      if (ws[i].text.find('=') == std::string::npos) {
        throw Failure{ws[i].line, ws[i].col, "unexpected '" + ws[i].text + "'"};
      }
      bool ok = false;
      for (auto a : allowed) ok = ok || a == key;
      if (!ok) throw Failure{ws[i].line, ws[i].col, "unknown option '" + key + "'"};
      if (o.get(key)) throw Failure{ws[i].line, ws[i].col, "duplicate option '" + key + "'"};
      o.found.emplace_back(key, ws[i]);
    }
    return o;
  }

  const Word& required(const Options& o, const std::string& key, const Word& stmt) const {
    const Word* w = o.get(key);
    if (!w) throw Failure{stmt.line, stmt.col, "missing required option '" + key + "='"};
    return *w;
  }

  struct Area {
    PulseArea kind = PulseArea::Explicit;
    double duration = 0.0;
  };

  static Area area_word(const Word& w) {
    if (w.text == "pi") return {PulseArea::Pi, 0.0};
    if (w.text == "pi/2") return {PulseArea::HalfPi, 0.0};
    if (w.text.rfind("dur=", 0) == 0) {
      const double d = option_value(w, Dimension::Time);
      if (d < 0.0) throw Failure{w.line, w.col, "negative duration"};
      return {PulseArea::Explicit, d};
    }
    throw Failure{w.line, w.col, "expected pi, pi/2 or dur=<time>, got '" + w.text + "'"};
  }

  void statement() {
    const Token& kw = toks_[pos_];
    stmt_line_ = kw.line;
    stmt_col_ = kw.col;
    if (kw.text == "{" || kw.text == "}") throw Failure{kw.line, kw.col, "unexpected '" + kw.text + "'"};
    std::vector<Word> ws = words();
    const Word head = ws.front();
    if (measured_) throw Failure{head.line, head.col, "statement after measure"};
    if (head.text == "set") {
      set_stmt(ws);
    } else if (head.text == "mw") {
      mw_stmt(ws);
    } else if (head.text == "stirap") {
      stirap_stmt(ws);
    } else if (head.text == "hold") {
      hold_stmt(ws);
    } else if (head.text == "rf") {
      rf_stmt(ws);
    } else if (head.text == "measure") {
      if (ws.size() > 1) throw Failure{ws[1].line, ws[1].col, "measure takes no arguments"};
      expect_eol();
      sched_.add_label("measure");
      measured_ = true;
    } else {
      throw Failure{head.line, head.col, "unknown keyword '" + head.text + "'"};
    }
  }

  void set_stmt(const std::vector<Word>& ws) {
    expect_eol();
    if (ws.size() != 2) {
      const Word& w = ws.size() > 2 ? ws[2] : ws[0];
      throw Failure{w.line, w.col, "expected 'set <key> = <value>'"};
    }
    auto [key, value] = split_option(ws[1]);
    if (ws[1].text.find('=') == std::string::npos || value.empty()) {
      throw Failure{ws[1].line, ws[1].col, "expected 'set <key> = <value>'"};
    }
    const std::size_t offset = key.size() + 1;
    if (key == "B") {
      if (!sched_.empty()) throw Failure{ws[0].line, ws[0].col, "set B must precede all pulses"};
      const double b = value_of(ws[1], offset, Dimension::Field);
      if (!(b > 0.0)) throw Failure{ws[1].line, ws[1].col + static_cast<int>(offset), "B must be positive"};
      b_field_ = b;
      b_field_set_ = true;
    } else if (key == "rf_mode") {
      if (!parse_rf_mode(value, mode_)) {
        throw Failure{ws[1].line, ws[1].col + static_cast<int>(offset),
                      "unknown rf mode '" + value + "' (single_plus, single_minus, dual_resonant)"};
      }
      mode_set_ = true;
    } else {
      throw Failure{ws[1].line, ws[1].col, "unknown setting '" + key + "'"};
    }
  }

  void mw_stmt(const std::vector<Word>& ws) {
    expect_eol();
    if (ws.size() < 3) throw Failure{ws[0].line, ws[0].col, "expected 'mw <transition> <pi|pi/2|dur=>'"};
    Transition tr;
    if (ws[1].text == "plus") {
      tr = Transition::Plus;
    } else if (ws[1].text == "minus") {
      tr = Transition::Minus;
    } else if (ws[1].text == "clock") {
      tr = Transition::Clock;
    } else {
      throw Failure{ws[1].line, ws[1].col, "unknown transition '" + ws[1].text + "' (plus, minus, clock)"};
    }
    const Area area = area_word(ws[2]);
    const Options o = options(ws, 3, {"rabi", "phase"});
    const Word& rw = required(o, "rabi", ws[0]);
    const double hz = option_value(rw, Dimension::Frequency);
    if (!(hz > 0.0)) throw Failure{rw.line, rw.col, "rabi must be positive"};
    const double phase = o.get("phase") ? option_value(*o.get("phase"), Dimension::Angle) : 0.0;
    Segment seg = mw_pulse(tr, angular(hz), area.duration, phase);
    seg.mw.rabi_hz = hz;
    seg.mw.area = area.kind;
    const double amp = angular(hz);
    switch (tr) {
      case Transition::Plus: seg.plus.peak = amp; break;
      case Transition::Minus: seg.minus.peak = amp; break;
      case Transition::Clock: seg.clock.peak = amp; break;
    }
    if (area.kind == PulseArea::Pi) seg.duration = kPi / amp;
    if (area.kind == PulseArea::HalfPi) seg.duration = 0.5 * kPi / amp;
    append(std::move(seg), std::nullopt, false);
  }

  void stirap_stmt(const std::vector<Word>& ws) {
    expect_eol();
    if (ws.size() < 2) throw Failure{ws[0].line, ws[0].col, "expected 'stirap enter|exit'"};
    StirapDirection dir;
    if (ws[1].text == "enter") {
      dir = StirapDirection::Enter;
    } else if (ws[1].text == "exit") {
      dir = StirapDirection::Exit;
    } else {
      throw Failure{ws[1].line, ws[1].col, "expected enter or exit, got '" + ws[1].text + "'"};
    }
    const Options o = options(ws, 2, {"tw", "toff", "peak"});
    const Word& tww = required(o, "tw", ws[0]);
    const Word& tow = required(o, "toff", ws[0]);
    const Word& pw = required(o, "peak", ws[0]);
    const double tw = option_value(tww, Dimension::Time);
    const double toff = option_value(tow, Dimension::Time);
    const double peak = option_value(pw, Dimension::Frequency);
    if (!(tw > 0.0)) throw Failure{tww.line, tww.col, "tw must be positive"};
    if (!(toff > 0.0)) throw Failure{tow.line, tow.col, "toff must be positive"};
    if (!(peak > 0.0)) throw Failure{pw.line, pw.col, "peak must be positive"};
    Segment seg = stirap_half(tw, toff, angular(peak), dir);
    seg.stirap.peak_hz = peak;
    seg.plus.peak = seg.minus.peak = angular(peak);
    const double crossing = stirap_crossing_amplitude(tw, toff, peak);
    if (dir == StirapDirection::Exit && dressing_hz_ && !close_to(*dressing_hz_, crossing, 1e-9)) {
      warning(ws[0].line, ws[0].col,
              "dressing amplitude jumps from " + format_exact(*dressing_hz_) +
                  " Hz to the STIRAP crossing amplitude " + format_exact(crossing) + " Hz");
    }
    append(std::move(seg), dir == StirapDirection::Enter ? std::optional<double>(crossing) : std::nullopt,
           dir == StirapDirection::Enter);
  }

  void hold_stmt(const std::vector<Word>& ws) {
    if (ws.size() < 2 || ws[1].text.find('=') != std::string::npos) {
      throw Failure{ws[0].line, ws[0].col, "expected 'hold <time>'"};
    }
    const double dur = value_of(ws[1], 0, Dimension::Time);
    if (dur < 0.0) throw Failure{ws[1].line, ws[1].col, "negative duration"};
    const Options o = options(ws, 2, {"mw"});
    double mw_hz = dressing_hz_.value_or(0.0);
    if (const Word* w = o.get("mw")) {
      mw_hz = option_value(*w, Dimension::Frequency);
      if (mw_hz < 0.0) throw Failure{w->line, w->col, "mw must be non-negative"};
      if (after_stirap_enter_ && !close_to(mw_hz, *dressing_hz_, 1e-9)) {
        warning(w->line, w->col,
                "hold mw=" + format_exact(mw_hz) + " Hz differs from the STIRAP crossing amplitude " +
                    format_exact(*dressing_hz_) + " Hz");
      }
    }
    Segment seg = hold(dur, angular(mw_hz));
    seg.hold.mw_hz = mw_hz;
    seg.plus.peak = seg.minus.peak = angular(mw_hz);

    if (!at_end() && peek().text == "{") {
      in_block_ = true;
      ++pos_;
      double cursor = 0.0;
      for (;;) {
        if (at_end()) throw Failure{ws[0].line, ws[0].col, "unterminated hold block"};
        const Token& t = peek();
        if (t.eol) {
          ++pos_;
          continue;
        }
        if (t.text == "}") {
          ++pos_;
          break;
        }
        if (t.text != "rf") throw Failure{t.line, t.col, "expected rf statement or '}' in hold block"};
        const std::vector<Word> rw = words();
        add_window(seg, rw, mw_hz, cursor, true);
      }
      in_block_ = false;
    }
    expect_eol();
    append(std::move(seg), mw_hz > 0.0 ? std::optional<double>(mw_hz) : std::nullopt, false);
  }

  void rf_stmt(const std::vector<Word>& ws) {
    expect_eol();
    Segment seg;
    seg.kind = SegmentKind::RfPulse;
    seg.label = "rf";
    double cursor = 0.0;
    add_window(seg, ws, 0.0, cursor, false);
    append(std::move(seg), std::nullopt, false);
  }

  // Adds one rf window; for a top-level pulse the segment takes its length.
  void add_window(Segment& seg, const std::vector<Word>& ws, double mw_hz, double& cursor, bool in_hold) {
    if (ws.size() < 2) throw Failure{ws[0].line, ws[0].col, "expected 'rf <pi|pi/2|dur=>'"};
    const Area area = area_word(ws[1]);
    const Options o = in_hold ? options(ws, 2, {"rabi", "phase", "detune", "at"})
                              : options(ws, 2, {"rabi", "phase", "detune"});
    const Word& rw = required(o, "rabi", ws[0]);
    const Word& pw = required(o, "phase", ws[0]);
    const double rabi = option_value(rw, Dimension::Frequency);
    const double phase = option_value(pw, Dimension::Angle);
    const double detune = o.get("detune") ? option_value(*o.get("detune"), Dimension::Frequency) : 0.0;
    if (rabi < 0.0) throw Failure{rw.line, rw.col, "rabi must be non-negative"};
    double start = cursor;
    const bool explicit_start = o.get("at") != nullptr;
    if (explicit_start) {
      start = option_value(*o.get("at"), Dimension::Time);
      if (start < 0.0) throw Failure{o.get("at")->line, o.get("at")->col, "negative rf start time"};
    }
    double dur = area.duration;
    if (area.kind != PulseArea::Explicit) {
      if (!(rabi > 0.0)) throw Failure{rw.line, rw.col, "rabi must be positive for a pi or pi/2 pulse"};
      const double omega = mw_hz > 0.0 ? effective_rf_rabi(angular(rabi), mode_) : angular(rabi);
      dur = (area.kind == PulseArea::Pi ? kPi : 0.5 * kPi) / omega;
    }
    if (!in_hold) seg.duration = dur;
    if (dur == 0.0) return;

    RfWindow w;
    w.start = start;
    w.duration = dur;
    w.rabi_hz = rabi;
    w.phi = phase;
    w.detune_hz = detune;
    w.mode = mode_;
    w.area = area.kind;
    w.explicit_start = explicit_start;
    try {
      seg = with_rf(seg, angular(rabi), phase, angular(detune), start, dur, mode_);
    } catch (const ValidationError& e) {
      throw Failure{ws[0].line, ws[0].col, std::string("rf window overflow: ") + e.what()};
    }
    for (auto& existing : seg.rf) {
      if (existing.start == start) {
        const double clipped = existing.duration;
        existing = w;
        existing.duration = clipped;
      }
    }
    cursor = start + dur;
    lint(ws[0], rabi, mw_hz);
  }

  void lint(const Word& at, double rabi_hz, double mw_hz) {
    if (mode_ == RfMode::DualResonant || rabi_hz == 0.0) return;
    const SpeciesCalibration cal = SpeciesCalibration::from_field(b_field_, PhysicalConstants{});
    const double split = std::abs(hertz(cal.delta_omega));
    if (rabi_hz >= split / 5.0 || (mw_hz > 0.0 && rabi_hz >= mw_hz / 5.0)) {
      warning(at.line, at.col, "Ω_rf ≥ |δω|/5 or Ω_rf ≥ Ω_μw/5: single-field approximation degraded");
    }
  }

  void append(Segment seg, std::optional<double> dressing_after, bool stirap_enter) {
    sched_.append(std::move(seg));
    dressing_hz_ = dressing_after;
    after_stirap_enter_ = stirap_enter;
  }
};

std::string area_text(PulseArea area, double duration) {
  switch (area) {
    case PulseArea::Pi: return "pi";
    case PulseArea::HalfPi: return "pi/2";
    case PulseArea::Explicit: break;
  }
  return "dur=" + format_quantity(duration, Dimension::Time);
}

[[noreturn]] void unrepresentable(std::size_t i, const std::string& why) {
  throw ValidationError("segment " + std::to_string(i) + " cannot be written as a sequence: " + why);
}

std::string window_text(const RfWindow& w, bool with_start) {
  std::string s = "rf " + area_text(w.area, w.duration) +
                  " rabi=" + format_quantity(w.rabi_hz, Dimension::Frequency) +
                  " phase=" + format_quantity(w.phi, Dimension::Angle);
  if (w.detune_hz != 0.0) s += " detune=" + format_quantity(w.detune_hz, Dimension::Frequency);
  if (with_start) s += " at=" + format_quantity(w.start, Dimension::Time);
  return s;
}

}  // namespace

bool ParseResult::has_errors() const {
  for (const auto& d : diagnostics) {
    if (d.severity == ParseDiagnostic::Severity::Error) return true;
  }
  return false;
}

ParseResult parse(const SequenceSource& src) { return Parser(src.text).run(); }

std::string serialize(const Schedule& schedule) {
  std::ostringstream os;
  if (schedule.settings().b_field) {
    os << "set B = " << format_quantity(*schedule.settings().b_field, Dimension::Field) << '\n';
  }
  RfMode mode = RfMode::SinglePlus;
  auto set_mode = [&](RfMode m) {
    if (m == mode) return;
    os << "set rf_mode = " << rf_mode_name(m) << '\n';
    mode = m;
  };
  const auto& segs = schedule.segments();
  for (std::size_t i = 0; i < segs.size(); ++i) {
    const Segment& s = segs[i];
    switch (s.kind) {
      case SegmentKind::MwPulse: {
        if (!s.rf.empty()) unrepresentable(i, "microwave pulse with rf");
        os << "mw " << transition_name(s.mw.transition) << ' ' << area_text(s.mw.area, s.duration)
           << " rabi=" << format_quantity(s.mw.rabi_hz, Dimension::Frequency)
           << " phase=" << format_quantity(s.mw.phase, Dimension::Angle) << '\n';
        break;
      }
      case SegmentKind::Stirap: {
        if (!s.rf.empty()) unrepresentable(i, "STIRAP ramp with rf");
        os << "stirap " << (s.stirap.direction == StirapDirection::Enter ? "enter" : "exit")
           << " tw=" << format_quantity(s.stirap.t_w, Dimension::Time)
           << " toff=" << format_quantity(s.stirap.t_off, Dimension::Time)
           << " peak=" << format_quantity(s.stirap.peak_hz, Dimension::Frequency) << '\n';
        break;
      }
      case SegmentKind::Hold: {
        if (s.plus.kind != Envelope::Kind::Constant || s.minus.kind != Envelope::Kind::Constant ||
            s.plus.peak != s.minus.peak || s.clock.peak != 0.0) {
          unrepresentable(i, "hold with unequal or shaped dressing fields");
        }
        for (const auto& w : s.rf) {
          if (w.mode != s.rf.front().mode) unrepresentable(i, "hold mixes rf modes");
        }
        if (!s.rf.empty()) set_mode(s.rf.front().mode);
        os << "hold " << format_quantity(s.duration, Dimension::Time)
           << " mw=" << format_quantity(s.hold.mw_hz, Dimension::Frequency);
        if (!s.rf.empty()) {
          os << " {\n";
          for (const auto& w : s.rf) os << "  " << window_text(w, true) << '\n';
          os << '}';
        }
        os << '\n';
        break;
      }
      case SegmentKind::RfPulse: {
        if (s.rf.size() != 1 || s.rf.front().start != 0.0) unrepresentable(i, "rf pulse not starting at 0");
        set_mode(s.rf.front().mode);
        RfWindow w = s.rf.front();
        w.duration = s.duration;
        os << window_text(w, false) << '\n';
        break;
      }
    }
  }
  for (const auto& l : schedule.labels()) {
    if (l.name == "measure") {
      os << "measure\n";
      break;
    }
  }
  return os.str();
}

std::string format_diagnostic(const ParseDiagnostic& d, const std::string& file_name) {
  return file_name + ":" + std::to_string(d.line) + ":" + std::to_string(d.column) + ": " +
         (d.severity == ParseDiagnostic::Severity::Error ? "error" : "warning") + ": " + d.message;
}

}  // namespace dsq
