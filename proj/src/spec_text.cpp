#include <algorithm>
#include <cctype>
#include <sstream>

#include "edgeplan/spec_io.hpp"
#include "text_util.hpp"

namespace edgeplan {

using detail::FormatNumber;
using detail::ParseInt;
using detail::ParseNumber;
using detail::SplitLines;
using detail::SplitWhitespace;
using detail::Trim;

std::string EmitDeployment(const Deployment& deployment) {
  std::string out;
  for (const auto& [c, p] : deployment.assignments) {
    out += c + " " + p.flavour + " " + p.node + "\n";
  }
  return out;
}

Deployment ParseDeployment(std::string_view text) {
  Deployment d;
  int line_no = 0;
  for (auto raw : SplitLines(text)) {
    ++line_no;
    auto line = Trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto parts = SplitWhitespace(line);
    if (parts.size() != 3) {
      throw ParseError("expected 'component flavour node'", line_no);
    }
    std::string c(parts[0]);
    if (d.assignments.count(c) != 0) {
      throw ParseError("component '" + c + "' assigned twice", line_no);
    }
    d.assignments[c] = Placement{std::string(parts[1]), std::string(parts[2])};
  }
  return d;
}

std::string FormatWeight(double weight) {
  std::string s = FormatNumber(weight);
  if (s.find_first_of(".e") == std::string::npos) s += ".0";
  return s;
}

std::string FormatConstraint(const SoftConstraint& constraint) {
  const SoftConstraint n = constraint.Normalized();
  std::string out(ToString(n.kind));
  if (n.kind == ConstraintKind::kAvoid) {
    out += "(d(" + n.component + "," + n.flavour + ")," + n.node;
  } else {
    out += "(" + n.component + "," + n.flavour + "," + n.other_component + "," + n.other_flavour;
  }
  if (n.provenance == Provenance::kEnergy || n.weight != 1.0) out += "," + FormatWeight(n.weight);
  out += ").";
  return out;
}

std::string EmitConstraints(const std::vector<SoftConstraint>& constraints) {
  std::string out;
  std::optional<Provenance> current;
  for (const auto& c : constraints) {
    if (!current || *current != c.provenance) {
      out += "# " + std::string(ToString(c.provenance)) + "\n";
      current = c.provenance;
    }
    out += FormatConstraint(c) + "\n";
  }
  return out;
}

namespace {

struct Term {
  std::string functor;  // atom text when args is empty
  std::vector<Term> args;
};

class TermParser {
 public:
  TermParser(std::string_view text, int line) : text_(text), line_(line) {}

  Term ParseTerm() {
    SkipSpace();
    std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                                   text_[pos_] == '_' || text_[pos_] == '.' || text_[pos_] == '-')) {
      // A '.' terminates the clause unless it sits inside a number.
      if (text_[pos_] == '.' &&
          (pos_ + 1 >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_ + 1])))) {
        break;
      }
      ++pos_;
    }
    if (pos_ == start) Fail("expected a term");
    Term t;
    t.functor = std::string(text_.substr(start, pos_ - start));
    SkipSpace();
    if (pos_ < text_.size() && text_[pos_] == '(') {
      ++pos_;
      t.args.push_back(ParseTerm());
      SkipSpace();
      while (pos_ < text_.size() && text_[pos_] == ',') {
        ++pos_;
        t.args.push_back(ParseTerm());
        SkipSpace();
      }
      if (pos_ >= text_.size() || text_[pos_] != ')') Fail("expected ')'");
      ++pos_;
    }
    return t;
  }

  void ExpectEnd() {
    SkipSpace();
    if (pos_ < text_.size() && text_[pos_] == '.') ++pos_;
    SkipSpace();
    if (pos_ != text_.size()) Fail("unexpected trailing text");
  }

  [[noreturn]] void Fail(const std::string& what) const {
    throw ParseError("malformed constraint (" + what + "): " + std::string(text_), line_);
  }

 private:
  void SkipSpace() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_;
};

const std::string& Atom(const Term& t, const TermParser& p) {
  if (!t.args.empty()) p.Fail("expected an atom");
  return t.functor;
}

std::pair<std::string, std::string> DeployTerm(const Term& t, const TermParser& p) {
  if (t.functor != "d" || t.args.size() != 2) p.Fail("expected d(Component,Flavour)");
  return {Atom(t.args[0], p), Atom(t.args[1], p)};
}

double WeightTerm(const Term& t, const TermParser& p) {
  auto w = ParseNumber(Atom(t, p));
  if (!w || !(*w > 0.0 && *w <= 1.0)) p.Fail("weight must be a number in (0,1]");
  return *w;
}

}  // namespace

std::vector<SoftConstraint> ParseConstraints(std::string_view text, Provenance default_provenance) {
  std::vector<SoftConstraint> out;
  Provenance provenance = default_provenance;
  int line_no = 0;
  for (auto raw : SplitLines(text)) {
    ++line_no;
    auto line = Trim(raw);
    if (line.empty()) continue;
    if (line.front() == '#' || line.front() == '%') {
      auto tag = Trim(line.substr(1));
      if (tag == "failure") provenance = Provenance::kFailure;
      if (tag == "energy") provenance = Provenance::kEnergy;
      continue;
    }
    TermParser p(line, line_no);
    Term t = p.ParseTerm();
    p.ExpectEnd();
    SoftConstraint c;
    const auto& a = t.args;
    if (t.functor == "avoid") {
      if (a.size() >= 2 && a[0].functor == "d" && !a[0].args.empty()) {
        auto [comp, fl] = DeployTerm(a[0], p);
        if (a.size() > 3) p.Fail("too many arguments");
        c = SoftConstraint::Avoid(comp, fl, Atom(a[1], p), provenance,
                                  a.size() == 3 ? WeightTerm(a[2], p) : 1.0);
      } else if (a.size() == 3 || a.size() == 4) {
        c = SoftConstraint::Avoid(Atom(a[0], p), Atom(a[1], p), Atom(a[2], p), provenance,
                                  a.size() == 4 ? WeightTerm(a[3], p) : 1.0);
      } else {
        p.Fail("avoid expects d(C,FC),N");
      }
    } else if (t.functor == "affinity" || t.functor == "antiaffinity") {
      std::string comp, fl, other, ofl;
      double weight = 1.0;
      if (a.size() >= 2 && a[0].functor == "d" && !a[0].args.empty()) {
        std::tie(comp, fl) = DeployTerm(a[0], p);
        std::tie(other, ofl) = DeployTerm(a[1], p);
        if (a.size() == 3) weight = WeightTerm(a[2], p);
        if (a.size() > 3) p.Fail("too many arguments");
      } else if (a.size() == 4 || a.size() == 5) {
        comp = Atom(a[0], p);
        fl = Atom(a[1], p);
        other = Atom(a[2], p);
        ofl = Atom(a[3], p);
        if (a.size() == 5) weight = WeightTerm(a[4], p);
      } else {
        p.Fail(t.functor + " expects C,FC,S,FS");
      }
      if (comp == other) p.Fail("pairwise constraint needs two distinct components");
      c = t.functor == "affinity"
              ? SoftConstraint::Affinity(comp, fl, other, ofl, provenance, weight)
              : SoftConstraint::AntiAffinity(comp, fl, other, ofl, provenance, weight);
    } else {
      p.Fail("unknown functor '" + t.functor + "'");
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::string EmitFacts(const FactBase& facts) {
  std::ostringstream out;
  for (const auto& f : facts.deployed) {
    out << "deployedTo(" << f.component << ", " << f.flavour << ", " << f.node << ").\n";
  }
  for (const auto& f : facts.timeouts) {
    out << "timeoutEvent(" << f.component << ", " << f.other << ", " << f.tick << ").\n";
  }
  for (const auto& f : facts.internals) out << "internal(" << f.component << ", " << f.tick << ").\n";
  for (const auto& f : facts.unreachables) {
    out << "unreachable(" << f.component << ", " << f.tick << ").\n";
  }
  for (const auto& f : facts.congestions) {
    out << "congested(" << f.node << ", " << f.other << ", " << f.tick << ").\n";
  }
  for (const auto& f : facts.disconnections) {
    out << "disconnected(" << f.node << ", " << f.tick << ").\n";
  }
  for (const auto& f : facts.overloads) {
    out << "overload(" << f.node << ", " << f.resource << ", " << f.tick_start << ", " << f.tick_end
        << ").\n";
  }
  for (const auto& f : facts.races) {
    out << "race(" << f.node << ", " << f.resource << ", " << f.component << ", " << f.flavour << ", "
        << f.other << ", " << f.other_flavour << ", " << f.tick << ").\n";
  }
  return out.str();
}

std::set<OverloadFact> CoalesceOverloads(
    const std::vector<std::tuple<std::string, std::string, int, double>>& samples) {
  std::map<std::pair<std::string, std::string>, std::map<int, double>> by_target;
  for (const auto& [node, resource, tick, load] : samples) {
    auto& slot = by_target[{node, resource}];
    auto [it, inserted] = slot.emplace(tick, load);
    if (!inserted) it->second = std::max(it->second, load);
  }
  std::set<OverloadFact> out;
  for (const auto& [key, ticks] : by_target) {
    std::optional<OverloadFact> open;
    for (const auto& [tick, load] : ticks) {
      if (open && tick == open->tick_end + 1) {
        open->tick_end = tick;
        open->peak_load_pct = std::max(*open->peak_load_pct, load);
        continue;
      }
      if (open) out.insert(*open);
      open = OverloadFact{key.first, key.second, tick, tick, load};
    }
    if (open) out.insert(*open);
  }
  return out;
}

namespace {

class LogParser {
 public:
  explicit LogParser(const ApplicationSpec* app) : app_(app) {}

  SimulationRecord Parse(std::string_view text) {
    auto lines = SplitLines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
      line_no_ = static_cast<int>(i) + 1;
      auto line = Trim(lines[i]);
      if (line.empty()) continue;
      auto message = Message(line);
      if (message.front() == '{') {
        // Placement blocks may wrap over several lines until the closing brace.
        std::string block(message);
        while (block.find('}') == std::string::npos && i + 1 < lines.size()) {
          block += " " + std::string(Trim(lines[++i]));
        }
        ParsePlacement(block);
        continue;
      }
      ParseMessage(message);
    }
    record_.facts.overloads = CoalesceOverloads(overload_samples_);
    return std::move(record_);
  }

 private:
  std::string_view Message(std::string_view line) {
    auto first = line.find('|');
    auto second = first == std::string_view::npos ? first : line.find('|', first + 1);
    if (second == std::string_view::npos) Fail("expected 'timestamp|source|message'");
    auto body = Trim(line.substr(second + 1));
    auto dash = body.find(" - ");
    if (dash == std::string_view::npos) Fail("expected 'Source - message'");
    auto msg = Trim(body.substr(dash + 3));
    if (msg.empty()) Fail("empty message");
    return msg;
  }

  void ParsePlacement(const std::string& block) {
    auto open = block.find('{');
    auto close = block.find('}');
    if (close == std::string::npos) Fail("unterminated placement block");
    std::string_view inner(block.data() + open + 1, close - open - 1);
    record_.facts.deployed.clear();
    std::size_t pos = 0;
    while (pos <= inner.size()) {
      auto bar = inner.find('|', pos);
      auto entry = Trim(inner.substr(pos, bar == std::string_view::npos ? inner.npos : bar - pos));
      if (!entry.empty()) {
        auto arrow = entry.find("->");
        if (arrow == std::string_view::npos) Fail("placement entry without '->'");
        auto token = Trim(entry.substr(0, arrow));
        auto node = Trim(entry.substr(arrow + 2));
        auto [comp, flavour] = SplitToken(token);
        record_.facts.deployed.insert({comp, flavour, std::string(node)});
      }
      if (bar == std::string_view::npos) break;
      pos = bar + 1;
    }
  }

  std::pair<std::string, std::string> SplitToken(std::string_view token) {
    if (app_ != nullptr) {
      for (const auto& c : app_->components) {
        if (token.size() > c.name.size() + 1 && token.substr(0, c.name.size()) == c.name &&
            token[c.name.size()] == '_') {
          auto fl = token.substr(c.name.size() + 1);
          if (c.FindFlavour(fl) != nullptr) return {c.name, std::string(fl)};
        }
      }
      Fail("placement token '" + std::string(token) + "' names no known component flavour");
    }
    auto us = token.rfind('_');
    if (us == std::string_view::npos || us == 0 || us + 1 == token.size()) {
      Fail("placement token '" + std::string(token) + "' is not component_flavour");
    }
    return {std::string(token.substr(0, us)), std::string(token.substr(us + 1))};
  }

  int Tick(std::string_view s) {
    auto t = ParseInt(s);
    if (!t || *t < 0) Fail("tick must be a non-negative integer");
    return *t;
  }

  double Number(std::string_view s) {
    auto v = ParseNumber(s);
    if (!v) Fail("expected a number, got '" + std::string(s) + "'");
    return *v;
  }

  void ParseMessage(std::string_view msg) {
    auto w = SplitWhitespace(msg);
    const std::string_view kw = w.front();
    auto need = [&](std::size_t n) {
      if (w.size() != n) Fail("'" + std::string(kw) + "' expects " + std::to_string(n - 1) + " fields");
    };
    auto& f = record_.facts;
    auto& p = record_.power;
    if (kw == "Event" || kw == "Placement") return;
    if (kw == "Config") {
      for (std::size_t i = 1; i < w.size(); ++i) {
        auto eq = w[i].find('=');
        if (eq == std::string_view::npos) Fail("Config expects key=value");
        auto key = w[i].substr(0, eq);
        auto value = w[i].substr(eq + 1);
        if (key == "ticks") p.ticks = Tick(value);
        if (key == "tick_minutes") p.tick_minutes = Number(value);
      }
    } else if (kw == "UNREACHABLE" || kw == "INTERNAL") {
      need(3);
      auto& target = kw == "UNREACHABLE" ? f.unreachables : f.internals;
      target.insert({std::string(w[1]), Tick(w[2])});
    } else if (kw == "TIMEOUT") {
      need(4);
      f.timeouts.insert({std::string(w[1]), std::string(w[2]), Tick(w[3])});
    } else if (kw == "CONGESTED") {
      need(4);
      f.congestions.insert({std::string(w[1]), std::string(w[2]), Tick(w[3])});
    } else if (kw == "DISCONNECTED") {
      need(3);
      f.disconnections.insert({std::string(w[1]), Tick(w[2])});
    } else if (kw == "OVERLOAD") {
      if (w.size() != 4 && w.size() != 5) Fail("OVERLOAD expects node resource tick [load%]");
      overload_samples_.emplace_back(std::string(w[1]), std::string(w[2]), Tick(w[3]),
                                     w.size() == 5 ? Number(w[4]) : 0.0);
    } else if (kw == "RACE") {
      need(8);
      f.races.insert({std::string(w[1]), std::string(w[2]), std::string(w[3]), std::string(w[4]),
                      std::string(w[5]), std::string(w[6]), Tick(w[7])});
    } else if (kw == "ENERGY") {
      need(4);
      p.component_w[std::string(w[1])][Tick(w[3])] = Number(w[2]);
    } else if (kw == "NODEPOWER") {
      need(4);
      p.node_w[std::string(w[1])][Tick(w[3])] = Number(w[2]);
    } else if (kw == "CONNPOWER") {
      need(5);
      p.connection_w[{std::string(w[1]), std::string(w[2])}][Tick(w[4])] = Number(w[3]);
    } else if (kw == "CARBON") {
      need(4);
      p.carbon_intensity[std::string(w[1])][Tick(w[3])] = Number(w[2]);
    } else {
      Fail("unknown log message '" + std::string(kw) + "'");
    }
  }

  [[noreturn]] void Fail(const std::string& what) const { throw ParseError(what, line_no_); }

  const ApplicationSpec* app_;
  int line_no_ = 0;
  SimulationRecord record_;
  std::vector<std::tuple<std::string, std::string, int, double>> overload_samples_;
};

}  // namespace

SimulationRecord ParseSimulationRecord(std::string_view text, const ApplicationSpec* app) {
  return LogParser(app).Parse(text);
}

FactBase ParseSimulationLog(std::string_view text, const ApplicationSpec* app) {
  return ParseSimulationRecord(text, app).facts;
}

}  // namespace edgeplan
