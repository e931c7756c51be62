#include "tm/parser.hpp"

#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <utility>

namespace tml {

namespace {

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

enum class Tok {
  Ident,
  Number,
  String,
  LBrace,
  RBrace,
  Arrow,         // ->
  TriggerArrow,  // ~>
  Equals,
  Plus,
  Colon,
  Semi,
  Pipe,
  Comma,
  At,
  Dot,
  End,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  SourceSpan span;
};

class Lexer {
public:
  Lexer(std::string_view src, std::string file)
      : src_(src), file_(std::move(file)) {}

  std::vector<Token> run(std::vector<Diagnostic>& diagnostics) {
    std::vector<Token> out;
    while (true) {
      skipTrivia();
      if (eof()) break;
      int line = line_, col = col_;
      char c = peek();
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        out.push_back(lexIdent(line, col));
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        out.push_back(lexNumber(line, col));
      } else if (c == '"') {
        out.push_back(lexString(line, col, diagnostics));
      } else {
        out.push_back(lexSymbol(line, col, diagnostics));
      }
      if (!diagnostics.empty()) break;
    }
    out.push_back(Token{Tok::End, "", spanHere()});
    return out;
  }

private:
  bool eof() const { return pos_ >= src_.size(); }
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
  }
  char advance() {
    char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skipTrivia() {
    while (!eof()) {
      char c = peek();
      if (c == '#') {
        while (!eof() && peek() != '\n') advance();
      } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
        advance();
      } else {
        break;
      }
    }
  }

  SourceSpan spanFrom(int line, int col) const {
    return SourceSpan{file_, line, col, line_, col_};
  }
  SourceSpan spanHere() const { return SourceSpan{file_, line_, col_, line_, col_}; }

  static bool identBody(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
  }

  Token lexIdent(int line, int col) {
    std::string text;
    while (!eof()) {
      char c = peek();
      if (identBody(c)) {
        text += advance();
      } else if (c == '-' && identBody(peek(1))) {
        text += advance();  // hyphen inside a name, not the '->' arrow
      } else {
        break;
      }
    }
    return Token{Tok::Ident, text, spanFrom(line, col)};
  }

  Token lexNumber(int line, int col) {
    std::string text;
    while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) text += advance();
    return Token{Tok::Number, text, spanFrom(line, col)};
  }

  Token lexString(int line, int col, std::vector<Diagnostic>& diagnostics) {
    advance();  // opening quote
    std::string text;
    while (true) {
      if (eof() || peek() == '\n') {
        diagnostics.push_back(Diagnostic{"SYN-001", Severity::Error,
                                         "unterminated string literal",
                                         spanFrom(line, col), ""});
        break;
      }
      char c = advance();
      if (c == '"') break;
      if (c == '\\' && !eof()) {
        char esc = advance();
        switch (esc) {
          case 'n': text += '\n'; break;
          case 't': text += '\t'; break;
          case '"': text += '"'; break;
          case '\\': text += '\\'; break;
          default: text += esc; break;
        }
      } else {
        text += c;
      }
    }
    return Token{Tok::String, text, spanFrom(line, col)};
  }

  Token lexSymbol(int line, int col, std::vector<Diagnostic>& diagnostics) {
    char c = advance();
    auto tok = [&](Tok k, const char* t) { return Token{k, t, spanFrom(line, col)}; };
    switch (c) {
      case '{': return tok(Tok::LBrace, "{");
      case '}': return tok(Tok::RBrace, "}");
      case '=': return tok(Tok::Equals, "=");
      case '+': return tok(Tok::Plus, "+");
      case ':': return tok(Tok::Colon, ":");
      case ';': return tok(Tok::Semi, ";");
      case '|': return tok(Tok::Pipe, "|");
      case ',': return tok(Tok::Comma, ",");
      case '@': return tok(Tok::At, "@");
      case '.': return tok(Tok::Dot, ".");
      case '-':
        if (peek() == '>') {
          advance();
          return tok(Tok::Arrow, "->");
        }
        break;
      case '~':
        if (peek() == '>') {
          advance();
          return tok(Tok::TriggerArrow, "~>");
        }
        break;
      default: break;
    }
    diagnostics.push_back(Diagnostic{"SYN-001", Severity::Error,
                                     std::string("unexpected character '") + c + "'",
                                     spanFrom(line, col), ""});
    return Token{Tok::End, "", spanFrom(line, col)};
  }

  std::string_view src_;
  std::string file_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

// ---------------------------------------------------------------------------
// Raw declarations (phase 1 output, references unresolved)
// ---------------------------------------------------------------------------

struct RawPath {
  std::vector<std::string> segments;
  SourceSpan span;

  std::string joined() const {
    std::string out;
    for (const auto& s : segments) {
      if (!out.empty()) out += '.';
      out += s;
    }
    return out;
  }
};

struct RawArc {
  RawPath from;
  RawPath to;
  bool decreate = false;
};

struct RawEvent {
  std::string id;
  std::string name;
  std::string timeRef;
  bool instant = false;
  std::vector<RawPath> region;
  std::map<std::string, std::string> annotations;
  SourceSpan span;
};

struct RawCompose {
  std::string id;
  std::string name;
  std::vector<std::pair<std::string, SourceSpan>> parts;
  SourceSpan span;
};

struct RawChronology {
  std::string id;
  SourceSpan span;
  std::vector<std::tuple<std::string, std::string, SourceSpan>> edges;
  std::vector<std::pair<std::string, SourceSpan>> repeats;
  struct Branch {
    std::string source;
    std::vector<std::string> targets;
    SourceSpan span;
  };
  std::vector<Branch> branches;
};

struct RawRecur {
  std::string eventId;
  Tick every = 0;
  int count = 0;
  std::map<std::string, std::string> unifiers;
  SourceSpan span;
};

// ---------------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------------

class Parser {
public:
  Parser(std::vector<Token> tokens, std::string file)
      : tokens_(std::move(tokens)), file_(std::move(file)) {}

  ParseResult run() {
    while (!atEnd() && !fatal_) parseDecl();
    resolve();
    ParseResult result;
    result.diagnostics = std::move(diagnostics_);
    if (!hasErrors(result.diagnostics)) {
      result.bundle = std::move(bundle_);
    }
    return result;
  }

  std::vector<Diagnostic> diagnostics_;

private:
  // --- token helpers ---

  const Token& cur() const { return tokens_[pos_]; }
  const Token& ahead(std::size_t n = 1) const {
    return tokens_[std::min(pos_ + n, tokens_.size() - 1)];
  }
  bool atEnd() const { return cur().kind == Tok::End; }
  Token take() { return tokens_[pos_++]; }

  bool is(Tok k) const { return cur().kind == k; }
  bool isKeyword(const char* kw) const {
    return cur().kind == Tok::Ident && cur().text == kw;
  }

  void error(const std::string& message, const SourceSpan& span,
             const std::string& rule = "SYN-001") {
    diagnostics_.push_back(Diagnostic{rule, Severity::Error, message, span, ""});
    fatal_ = rule == "SYN-001";
  }

  Token expect(Tok k, const char* what) {
    if (!is(k)) {
      error(std::string("expected ") + what + ", found '" + cur().text + "'",
            cur().span);
      return Token{k, "", cur().span};
    }
    return take();
  }

  Token expectIdent(const char* what) { return expect(Tok::Ident, what); }

  void expectKeyword(const char* kw) {
    if (!isKeyword(kw)) {
      error(std::string("expected '") + kw + "', found '" + cur().text + "'",
            cur().span);
      return;
    }
    take();
  }

  // --- declarations ---

  void parseDecl() {
    if (!is(Tok::Ident)) {
      error("expected a declaration keyword, found '" + cur().text + "'", cur().span);
      return;
    }
    const std::string& kw = cur().text;
    if (kw == "thimac") {
      parseThimac("");
    } else if (kw == "flow") {
      parseFlow();
    } else if (kw == "trigger") {
      parseTrigger();
    } else if (kw == "event") {
      parseEvent();
    } else if (kw == "compose") {
      parseCompose();
    } else if (kw == "chronology") {
      parseChronology();
    } else if (kw == "recur") {
      parseRecur();
    } else {
      error("unknown declaration '" + kw + "'", cur().span);
    }
  }

  void parseThimac(const std::string& parentPath) {
    take();  // 'thimac'
    Token nameTok = expectIdent("thimac name");
    if (fatal_) return;
    std::string leaf = nameTok.text;
    if (actionFromName(leaf) || leaf == "in" || leaf == "out") {
      diagnostics_.push_back(Diagnostic{"NAME-003", Severity::Error,
                                        "'" + leaf + "' is reserved and cannot name a thimac",
                                        nameTok.span, ""});
    }
    std::string path = parentPath.empty() ? leaf : parentPath + "." + leaf;
    std::string display = leaf;
    if (is(Tok::String)) display = take().text;

    if (bundle_.model.thimacs.count(path)) {
      diagnostics_.push_back(Diagnostic{"NAME-001", Severity::Error,
                                        "duplicate thimac '" + path + "'",
                                        nameTok.span, ""});
    } else {
      Thimac t;
      t.id = path;
      t.name = display;
      if (!parentPath.empty()) {
        t.parent = parentPath;
        bundle_.model.thimacs[parentPath].children.insert(path);
      } else {
        bundle_.model.roots.push_back(path);
      }
      bundle_.model.thimacs.emplace(path, std::move(t));
    }

    expect(Tok::LBrace, "'{'");
    while (!fatal_ && !is(Tok::RBrace) && !atEnd()) {
      if (isKeyword("thimac")) {
        parseThimac(path);
      } else if (is(Tok::At)) {
        auto [key, value] = parseAnnotation();
        bundle_.model.thimacs[path].annotations[key] = value;
      } else if (is(Tok::Ident) && actionFromName(cur().text)) {
        Token actionTok = take();
        Action action = *actionFromName(actionTok.text);
        std::string stageId = path + "." + actionTok.text;
        if (bundle_.model.stages.count(stageId)) {
          diagnostics_.push_back(
              Diagnostic{"NAME-002", Severity::Error,
                         "thimac '" + path + "' already owns a " + actionTok.text +
                             " stage",
                         actionTok.span, ""});
        } else {
          bundle_.model.stages.emplace(stageId, StageNode{stageId, action, path});
          bundle_.model.thimacs[path].stages.insert(stageId);
        }
      } else {
        error("expected a stage keyword, nested thimac or annotation, found '" +
                  cur().text + "'",
              cur().span);
        return;
      }
    }
    expect(Tok::RBrace, "'}'");
  }

  std::pair<std::string, std::string> parseAnnotation() {
    take();  // '@'
    Token key = expectIdent("annotation key");
    std::string value;
    if (is(Tok::Equals)) {
      take();
      if (is(Tok::Ident) || is(Tok::Number) || is(Tok::String)) {
        value = take().text;
      } else {
        error("expected an annotation value", cur().span);
      }
    }
    return {key.text, value};
  }

  RawPath parsePath() {
    RawPath p;
    Token first = expectIdent("a dotted stage path");
    p.segments.push_back(first.text);
    p.span = first.span;
    while (is(Tok::Dot)) {
      take();
      Token seg = expectIdent("path segment");
      p.segments.push_back(seg.text);
      p.span.endLine = seg.span.endLine;
      p.span.endCol = seg.span.endCol;
    }
    return p;
  }

  void parseFlow() {
    take();
    RawArc arc;
    arc.from = parsePath();
    expect(Tok::Arrow, "'->'");
    arc.to = parsePath();
    rawFlows_.push_back(std::move(arc));
  }

  void parseTrigger() {
    take();
    RawArc arc;
    arc.from = parsePath();
    expect(Tok::TriggerArrow, "'~>'");
    arc.to = parsePath();
    if (isKeyword("decreate")) {
      take();
      arc.decreate = true;
    }
    rawTriggers_.push_back(std::move(arc));
  }

  std::string parseTimeRef() {
    if (is(Tok::Ident) || is(Tok::Number) || is(Tok::String)) return take().text;
    error("expected a time reference after 'at'", cur().span);
    return "";
  }

  void parseEvent() {
    take();
    RawEvent e;
    Token id = expectIdent("event id");
    e.id = id.text;
    e.span = id.span;
    if (is(Tok::String)) e.name = take().text;
    expectKeyword("at");
    e.timeRef = parseTimeRef();
    if (isKeyword("instant")) {
      take();
      e.instant = true;
    }
    expect(Tok::LBrace, "'{'");
    expectKeyword("region");
    expect(Tok::Colon, "':'");
    e.region.push_back(parsePath());
    while (is(Tok::Comma)) {
      take();
      if (is(Tok::RBrace) || is(Tok::At)) break;  // trailing comma
      e.region.push_back(parsePath());
    }
    while (is(Tok::At) && !fatal_) {
      auto [key, value] = parseAnnotation();
      e.annotations[key] = value;
    }
    expect(Tok::RBrace, "'}'");
    declareEventId(e.id, id.span);
    rawEvents_.push_back(std::move(e));
  }

  void parseCompose() {
    take();
    RawCompose c;
    Token id = expectIdent("composite event id");
    c.id = id.text;
    c.span = id.span;
    if (is(Tok::String)) c.name = take().text;
    expect(Tok::Equals, "'='");
    Token first = expectIdent("sub-event id");
    c.parts.emplace_back(first.text, first.span);
    expect(Tok::Plus, "'+'");
    Token second = expectIdent("sub-event id");
    c.parts.emplace_back(second.text, second.span);
    while (is(Tok::Plus)) {
      take();
      Token part = expectIdent("sub-event id");
      c.parts.emplace_back(part.text, part.span);
    }
    declareEventId(c.id, id.span);
    rawComposes_.push_back(std::move(c));
  }

  void parseChronology() {
    take();
    RawChronology c;
    Token id = expectIdent("chronology id");
    c.id = id.text;
    c.span = id.span;
    if (!chronologyIds_.insert(c.id).second) {
      diagnostics_.push_back(Diagnostic{"NAME-001", Severity::Error,
                                        "duplicate chronology '" + c.id + "'",
                                        id.span, ""});
    }
    expect(Tok::LBrace, "'{'");
    while (!fatal_ && !is(Tok::RBrace) && !atEnd()) {
      if (isKeyword("branch")) {
        take();
        RawChronology::Branch b;
        Token src = expectIdent("branch source event");
        b.source = src.text;
        b.span = src.span;
        expect(Tok::LBrace, "'{'");
        expect(Tok::Arrow, "'->'");
        b.targets.push_back(expectIdent("branch target").text);
        while (is(Tok::Pipe)) {
          take();
          expect(Tok::Arrow, "'->'");
          b.targets.push_back(expectIdent("branch target").text);
        }
        expect(Tok::RBrace, "'}'");
        if (is(Tok::Semi)) take();
        c.branches.push_back(std::move(b));
      } else if (isKeyword("repeat")) {
        take();
        Token ev = expectIdent("repeated event");
        c.repeats.emplace_back(ev.text, ev.span);
        expect(Tok::Semi, "';'");
      } else {
        Token from = expectIdent("event id");
        expect(Tok::Arrow, "'->'");
        Token to = expectIdent("event id");
        expect(Tok::Semi, "';'");
        c.edges.emplace_back(from.text, to.text, from.span);
      }
    }
    expect(Tok::RBrace, "'}'");
    rawChronologies_.push_back(std::move(c));
  }

  void parseRecur() {
    take();
    RawRecur r;
    Token ev = expectIdent("event id");
    r.eventId = ev.text;
    r.span = ev.span;
    expectKeyword("every");
    Token every = expect(Tok::Number, "a tick interval");
    r.every = every.text.empty() ? 0 : std::stoll(every.text);
    expectKeyword("count");
    Token count = expect(Tok::Number, "an occurrence count");
    r.count = count.text.empty() ? 0 : std::stoi(count.text);
    // unifier list: IDENT '=' value pairs until the next declaration
    while (is(Tok::Ident) && ahead().kind == Tok::Equals && !fatal_) {
      Token key = take();
      take();  // '='
      if (is(Tok::Ident) || is(Tok::Number) || is(Tok::String)) {
        r.unifiers[key.text] = take().text;
      } else {
        error("expected a unifier value", cur().span);
      }
    }
    rawRecurs_.push_back(std::move(r));
  }

  void declareEventId(const std::string& id, const SourceSpan& span) {
    if (!eventIds_.insert(id).second) {
      diagnostics_.push_back(Diagnostic{"NAME-001", Severity::Error,
                                        "duplicate event '" + id + "'", span, ""});
    }
  }

  // --- phase 2: reference resolution ---

  struct ResolvedRef {
    std::string stage;
    std::optional<Port> port;
  };

  std::optional<ResolvedRef> resolveStagePath(const RawPath& path, bool allowPort) {
    std::vector<std::string> segs = path.segments;
    std::optional<Port> port;
    if (!segs.empty() && (segs.back() == "in" || segs.back() == "out")) {
      port = segs.back() == "in" ? Port::In : Port::Out;
      segs.pop_back();
    }
    auto fail = [&](const std::string& why) {
      diagnostics_.push_back(Diagnostic{"REF-001", Severity::Error,
                                        "'" + path.joined() + "' " + why, path.span, ""});
      return std::nullopt;
    };
    if (port && !allowPort) return fail("must name a stage, not a transfer port");
    if (segs.size() < 2) return fail("does not name a <thimac>.<action> stage");
    std::string actionSeg = segs.back();
    if (!actionFromName(actionSeg)) {
      return fail("does not end in one of create/receive/process/release/transfer");
    }
    if (port && actionSeg != "transfer") {
      return fail("uses a port qualifier on a non-transfer stage");
    }
    segs.pop_back();
    std::string thimacId;
    for (const auto& s : segs) {
      if (!thimacId.empty()) thimacId += '.';
      thimacId += s;
    }
    if (!bundle_.model.thimacs.count(thimacId)) {
      return fail("references unknown thimac '" + thimacId + "'");
    }
    std::string stage = thimacId + "." + actionSeg;
    if (!bundle_.model.stages.count(stage)) {
      return fail("references a stage the thimac does not declare");
    }
    return ResolvedRef{stage, port};
  }

  void resolve() {
    if (fatal_) return;
    for (const auto& arc : rawFlows_) {
      auto from = resolveStagePath(arc.from, true);
      auto to = resolveStagePath(arc.to, true);
      if (from && to) {
        bundle_.model.flows.push_back(
            FlowArc{PortRef{from->stage, from->port}, PortRef{to->stage, to->port}});
      }
    }
    for (const auto& arc : rawTriggers_) {
      auto from = resolveStagePath(arc.from, false);
      auto to = resolveStagePath(arc.to, false);
      if (from && to) {
        bundle_.model.triggers.push_back(TriggerArc{from->stage, to->stage, arc.decreate});
      }
    }
    for (const auto& raw : rawEvents_) {
      Event e;
      e.id = raw.id;
      e.name = raw.name.empty() ? raw.id : raw.name;
      e.timeRef = raw.timeRef;
      e.duration = raw.instant ? EventDuration::Instant : EventDuration::Extended;
      e.annotations = raw.annotations;
      for (const auto& path : raw.region) {
        if (auto ref = resolveStagePath(path, true)) e.region.stages.insert(ref->stage);
      }
      bundle_.events.push_back(std::move(e));
    }
    for (const auto& raw : rawComposes_) {
      std::vector<Event> parts;
      bool complete = true;
      for (const auto& [partId, span] : raw.parts) {
        const Event* part = bundle_.findEvent(partId);
        if (!part) {
          diagnostics_.push_back(
              Diagnostic{"REF-001", Severity::Error,
                         "composite '" + raw.id + "' references unknown or later event '" +
                             partId + "'",
                         span, ""});
          complete = false;
          continue;
        }
        parts.push_back(*part);
      }
      if (!complete || parts.size() < 2) continue;
      try {
        bundle_.events.push_back(composeEvents(parts, raw.id, raw.name));
      } catch (const TmError& err) {
        diagnostics_.push_back(
            Diagnostic{"EVT-003", Severity::Error, err.what(), raw.span, ""});
      }
    }
    for (const auto& raw : rawChronologies_) {
      Chronology c;
      c.id = raw.id;
      auto checkEvent = [&](const std::string& id, const SourceSpan& span) {
        if (bundle_.findEvent(id)) return true;
        diagnostics_.push_back(Diagnostic{"REF-001", Severity::Error,
                                          "chronology '" + raw.id +
                                              "' references unknown event '" + id + "'",
                                          span, ""});
        return false;
      };
      auto addEdge = [&](const std::string& from, const std::string& to, EdgeKind kind) {
        ChronEdge edge{from, to, kind};
        for (const auto& existing : c.edges) {
          if (existing == edge) return;
        }
        c.edges.push_back(edge);
        c.events.insert(from);
        c.events.insert(to);
      };
      for (const auto& [from, to, span] : raw.edges) {
        if (checkEvent(from, span) && checkEvent(to, span)) {
          addEdge(from, to, EdgeKind::Succession);
        }
      }
      std::map<std::string, int> groupCounter;
      for (const auto& b : raw.branches) {
        if (!checkEvent(b.source, b.span)) continue;
        BranchGroup group;
        group.source = b.source;
        group.id = b.source + "#" + std::to_string(groupCounter[b.source]++);
        for (const auto& target : b.targets) {
          if (!checkEvent(target, b.span)) continue;
          addEdge(b.source, target, EdgeKind::Succession);
          group.targets.push_back(target);
        }
        if (!group.targets.empty()) c.branchGroups.push_back(std::move(group));
      }
      for (const auto& [ev, span] : raw.repeats) {
        if (checkEvent(ev, span)) addEdge(ev, ev, EdgeKind::Repeat);
      }
      bundle_.chronologies.push_back(std::move(c));
    }
    std::set<std::string> recurSeen;
    for (const auto& raw : rawRecurs_) {
      if (!bundle_.findEvent(raw.eventId)) {
        diagnostics_.push_back(Diagnostic{"REF-001", Severity::Error,
                                          "recur references unknown event '" +
                                              raw.eventId + "'",
                                          raw.span, ""});
        continue;
      }
      if (!recurSeen.insert(raw.eventId).second) {
        diagnostics_.push_back(Diagnostic{"NAME-001", Severity::Error,
                                          "duplicate recurrence for event '" +
                                              raw.eventId + "'",
                                          raw.span, ""});
        continue;
      }
      bundle_.recurrences.push_back(
          Recurrence{raw.eventId, raw.every, raw.count, raw.unifiers});
    }
  }

  std::vector<Token> tokens_;
  std::string file_;
  std::size_t pos_ = 0;
  bool fatal_ = false;

  ModelBundle bundle_;
  std::vector<RawArc> rawFlows_;
  std::vector<RawArc> rawTriggers_;
  std::vector<RawEvent> rawEvents_;
  std::vector<RawCompose> rawComposes_;
  std::vector<RawChronology> rawChronologies_;
  std::vector<RawRecur> rawRecurs_;
  std::set<std::string> eventIds_;
  std::set<std::string> chronologyIds_;
};

}  // namespace

ParseResult parseModel(std::string_view text, const std::string& filename) {
  std::vector<Diagnostic> lexDiagnostics;
  Lexer lexer(text, filename);
  std::vector<Token> tokens = lexer.run(lexDiagnostics);
  if (!lexDiagnostics.empty()) {
    ParseResult result;
    result.diagnostics = std::move(lexDiagnostics);
    return result;
  }
  Parser parser(std::move(tokens), filename);
  return parser.run();
}

}  // namespace tml
