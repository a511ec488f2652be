#include "drift/config.hpp"

#include <cctype>
#include <charconv>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

namespace drift {

namespace toml_lite {

namespace {

class Parser {
 public:
  explicit Parser(const std::string& text) : s_(text) {}

  Document run() {
    Document doc;
    std::string section;
    doc.sections[section];
    while (true) {
      skip_blank_lines();
      if (eof()) break;
      if (peek() == '[') {
        ++pos_;
        std::string name;
        while (!eof() && peek() != ']' && peek() != '\n') name.push_back(s_[pos_++]);
        if (eof() || peek() != ']') fail("unterminated section header");
        ++pos_;
        section = trim(name);
        if (section.empty() || !is_key(section)) fail("invalid section name '" + section + "'");
        if (doc.sections.count(section) && section_seen_.count(section))
          fail("duplicate section [" + section + "]");
        section_seen_.insert(section);
        doc.sections[section];
        end_of_line();
        continue;
      }
      std::string key;
      while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' ||
                        peek() == '-'))
        key.push_back(s_[pos_++]);
      if (key.empty()) fail("expected a key");
      skip_spaces();
      if (eof() || peek() != '=') fail("expected '=' after key '" + key + "'");
      ++pos_;
      skip_spaces();
      const std::size_t key_line = line_;
      Value v = value();
      auto& table = doc.sections[section];
      if (table.count(key)) {
        line_ = key_line;
        fail("duplicate key '" + key + "'");
      }
      table[key] = std::move(v);
      end_of_line();
    }
    return doc;
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
  }
  static bool is_key(const std::string& s) {
    for (char c : s)
      if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
    return true;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("config line " + std::to_string(line_) + ": " + msg);
  }
  bool eof() const { return pos_ >= s_.size(); }
  char peek() const { return s_[pos_]; }

  void skip_spaces() {
    while (!eof() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) ++pos_;
  }
  void skip_comment() {
    if (!eof() && peek() == '#')
      while (!eof() && peek() != '\n') ++pos_;
  }
  void skip_blank_lines() {
    while (true) {
      skip_spaces();
      skip_comment();
      if (!eof() && peek() == '\n') {
        ++pos_;
        ++line_;
        continue;
      }
      return;
    }
  }
  void end_of_line() {
    skip_spaces();
    skip_comment();
    if (eof()) return;
    if (peek() != '\n') fail("unexpected trailing characters");
    ++pos_;
    ++line_;
  }

  Value value() {
    Value out;
    out.line = line_;
    if (eof()) fail("missing value");
    const char c = peek();
    if (c == '"') {
      out.v = string();
    } else if (c == '[') {
      out.v = array();
    } else if (s_.compare(pos_, 4, "true") == 0) {
      pos_ += 4;
      out.v = true;
    } else if (s_.compare(pos_, 5, "false") == 0) {
      pos_ += 5;
      out.v = false;
    } else {
      std::string tok;
      while (!eof() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '.' ||
                        peek() == '+' || peek() == '-' || peek() == '_'))
        tok.push_back(s_[pos_++]);
      if (tok.empty()) fail("cannot parse value");
      std::string digits;
      for (char ch : tok)
        if (ch != '_') digits.push_back(ch);
      const bool is_float = digits.find_first_of(".eE") != std::string::npos;
      const char* first = digits.data() + (digits[0] == '+' ? 1 : 0);
      const char* last = digits.data() + digits.size();
      if (is_float) {
        double d = 0.0;
        const auto r = std::from_chars(first, last, d);
        if (r.ec != std::errc() || r.ptr != last) fail("cannot parse number '" + tok + "'");
        out.v = d;
      } else {
        std::int64_t i = 0;
        const auto r = std::from_chars(first, last, i);
        if (r.ec != std::errc() || r.ptr != last) fail("cannot parse value '" + tok + "'");
        out.v = i;
      }
    }
    return out;
  }

  std::string string() {
    ++pos_;
    std::string out;
    while (true) {
      if (eof() || peek() == '\n') fail("unterminated string");
      const char c = s_[pos_++];
      if (c == '"') return out;
      if (c == '\\') {
        if (eof()) fail("unterminated string");
        const char e = s_[pos_++];
        switch (e) {
          case '"': out.push_back('"'); break;
          case '\\': out.push_back('\\'); break;
          case 'n': out.push_back('\n'); break;
          case 't': out.push_back('\t'); break;
          default: fail(std::string("unsupported escape \\") + e);
        }
      } else {
        out.push_back(c);
      }
    }
  }

  Array array() {
    ++pos_;
    Array out;
    while (true) {
      skip_blank_lines();
      if (eof()) fail("unterminated array");
      if (peek() == ']') {
        ++pos_;
        return out;
      }
      out.push_back(value());
      skip_blank_lines();
      if (eof()) fail("unterminated array");
      if (peek() == ',') {
        ++pos_;
      } else if (peek() != ']') {
        fail("expected ',' or ']' in array");
      }
    }
  }

  const std::string& s_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::set<std::string> section_seen_;
};

}  // namespace

Document parse(const std::string& text) { return Parser(text).run(); }

}  // namespace toml_lite

namespace {

using toml_lite::Table;
using toml_lite::Value;

[[noreturn]] void bad(const std::string& section, const std::string& key, const Value& v,
                      const std::string& expected) {
  throw ConfigError("config line " + std::to_string(v.line) + ": " + section + "." + key +
                    " must be " + expected);
}

class SectionReader {
 public:
  SectionReader(const toml_lite::Document& doc, std::string name, std::set<std::string> allowed)
      : name_(std::move(name)) {
    const auto it = doc.sections.find(name_);
    if (it != doc.sections.end()) table_ = &it->second;
    if (!table_) return;
    for (const auto& [k, v] : *table_)
      if (!allowed.count(k))
        throw ConfigError("config line " + std::to_string(v.line) + ": unknown key " + name_ + "." + k);
  }

  bool present() const { return table_ != nullptr; }
  const Value* find(const std::string& key) const {
    if (!table_) return nullptr;
    const auto it = table_->find(key);
    return it == table_->end() ? nullptr : &it->second;
  }

  std::string str(const std::string& key, const std::string& fallback) const {
    const Value* v = find(key);
    if (!v) return fallback;
    if (const auto* s = std::get_if<std::string>(&v->v)) return *s;
    bad(name_, key, *v, "a string");
  }
  double num(const std::string& key, double fallback) const {
    const Value* v = find(key);
    if (!v) return fallback;
    if (const auto* d = std::get_if<double>(&v->v)) return *d;
    if (const auto* i = std::get_if<std::int64_t>(&v->v)) return static_cast<double>(*i);
    bad(name_, key, *v, "a number");
  }
  std::int64_t integer(const std::string& key, std::int64_t fallback) const {
    const Value* v = find(key);
    if (!v) return fallback;
    if (const auto* i = std::get_if<std::int64_t>(&v->v)) return *i;
    bad(name_, key, *v, "an integer");
  }
  std::vector<std::string> strings(const std::string& key,
                                   const std::vector<std::string>& fallback) const {
    const Value* v = find(key);
    if (!v) return fallback;
    const auto* arr = std::get_if<toml_lite::Array>(&v->v);
    if (!arr) bad(name_, key, *v, "an array of strings");
    std::vector<std::string> out;
    for (const auto& e : *arr) {
      const auto* s = std::get_if<std::string>(&e.v);
      if (!s) bad(name_, key, e, "an array of strings");
      out.push_back(*s);
    }
    return out;
  }
  std::vector<int> ints(const std::string& key, const std::vector<int>& fallback) const {
    const Value* v = find(key);
    if (!v) return fallback;
    const auto* arr = std::get_if<toml_lite::Array>(&v->v);
    if (!arr) bad(name_, key, *v, "an array of integers");
    std::vector<int> out;
    for (const auto& e : *arr) {
      const auto* i = std::get_if<std::int64_t>(&e.v);
      if (!i) bad(name_, key, e, "an array of integers");
      out.push_back(static_cast<int>(*i));
    }
    return out;
  }

 private:
  std::string name_;
  const Table* table_ = nullptr;
};

}  // namespace

RunConfig parse_config(const std::string& text) {
  const auto doc = toml_lite::parse(text);
  for (const auto& [name, table] : doc.sections) {
    static const std::set<std::string> known = {"", "data", "flow", "location", "scale", "training"};
    if (!known.count(name)) throw ConfigError("unknown config section [" + name + "]");
    if (name.empty() && !table.empty())
      throw ConfigError("config line " + std::to_string(table.begin()->second.line) +
                        ": key outside of any section");
  }

  RunConfig cfg;
  const SectionReader data(doc, "data", {"features", "outcome", "transforms", "delimiter"});
  if (!data.present()) throw ConfigError("config is missing the [data] section");
  cfg.schema.features = data.strings("features", {});
  if (cfg.schema.features.empty()) throw ConfigError("data.features must list at least one column");
  const std::string outcome = data.str("outcome", "");
  if (outcome.empty()) throw ConfigError("data.outcome is required");
  cfg.schema.outcome = parse_outcome_spec(outcome);
  for (const auto& t : data.strings("transforms", {}))
    cfg.schema.transforms.push_back(parse_transform(t));
  const std::string delim = data.str("delimiter", ",");
  if (delim.size() != 1 || delim == "\"" || delim == "\n")
    throw ConfigError("data.delimiter must be a single character other than a quote or newline");
  cfg.schema.delimiter = delim[0];

  const SectionReader flow(doc, "flow", {"kind", "base", "hidden", "order", "levels"});
  const bool ordinal = cfg.schema.outcome.kind == OutcomeKind::Ordinal;
  auto& spec = cfg.spec;
  spec.feature_names = cfg.schema.features;
  spec.outcome = cfg.schema.outcome;
  spec.flow.kind = parse_flow_kind(flow.str("kind", ordinal ? "ordinal" : "monotone_net"));
  spec.base = parse_base_kind(flow.str("base", "logistic"));
  spec.flow.hidden = flow.ints("hidden", spec.flow.hidden);
  spec.flow.order = static_cast<int>(flow.integer("order", spec.flow.order));
  spec.flow.levels = static_cast<int>(flow.integer("levels", ordinal ? spec.outcome.levels : 0));
  if (spec.flow.order < 1) throw ConfigError("flow.order must be at least 1");
  if (spec.flow.hidden.empty()) throw ConfigError("flow.hidden must list at least one width");
  for (int w : spec.flow.hidden)
    if (w < 1) throw ConfigError("flow.hidden widths must be positive");

  const SectionReader loc(doc, "location", {"terms"});
  const SectionReader scale(doc, "scale", {"terms"});
  const auto loc_terms = loc.strings("terms", {"intercept"});
  spec.location = parse_terms(loc_terms, spec.feature_names);
  spec.scale = parse_terms(scale.strings("terms", {}), spec.feature_names);
  validate_spec(spec);

  const SectionReader tr(doc, "training",
                         {"learning_rate", "decay", "epochs", "batch_size", "validation_fraction",
                          "patience", "seed", "init", "clip_norm"});
  auto& t = cfg.train;
  t.learning_rate = tr.num("learning_rate", t.learning_rate);
  t.decay = tr.num("decay", t.decay);
  t.epochs = static_cast<int>(tr.integer("epochs", t.epochs));
  const auto batch = tr.integer("batch_size", static_cast<std::int64_t>(t.batch_size));
  if (batch < 1) throw ConfigError("training.batch_size must be at least 1");
  t.batch_size = static_cast<std::size_t>(batch);
  t.validation_fraction = tr.num("validation_fraction", t.validation_fraction);
  t.patience = static_cast<int>(tr.integer("patience", t.patience));
  const auto seed = tr.integer("seed", static_cast<std::int64_t>(t.seed));
  if (seed < 0) throw ConfigError("training.seed must be non-negative");
  t.seed = static_cast<std::uint64_t>(seed);
  t.init = parse_init_scheme(tr.str("init", std::string(to_string(t.init))));
  t.clip_norm = tr.num("clip_norm", t.clip_norm);
  t.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

namespace {

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    out.push_back(c);
  }
  return out + "\"";
}

template <class T, class F>
std::string list(const std::vector<T>& v, F&& fmt) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + fmt(v[i]);
  return out + "]";
}

}  // namespace

std::string format_config(const RunConfig& cfg) {
  std::ostringstream os;
  os << std::setprecision(17);
  const auto& names = cfg.spec.feature_names;
  os << "[data]\n"
     << "features = " << list(cfg.schema.features, quoted) << "\n"
     << "outcome = " << quoted(format_outcome_spec(cfg.schema.outcome)) << "\n";
  if (!cfg.schema.transforms.empty())
    os << "transforms = "
       << list(cfg.schema.transforms, [](const ColumnTransform& t) { return quoted(format_transform(t)); })
       << "\n";
  if (cfg.schema.delimiter != ',')
    os << "delimiter = " << quoted(std::string(1, cfg.schema.delimiter)) << "\n";
  os << "\n[flow]\n"
     << "kind = " << quoted(std::string(to_string(cfg.spec.flow.kind))) << "\n"
     << "base = " << quoted(std::string(to_string(cfg.spec.base))) << "\n"
     << "hidden = " << list(cfg.spec.flow.hidden, [](int w) { return std::to_string(w); }) << "\n"
     << "order = " << cfg.spec.flow.order << "\n";
  if (cfg.spec.flow.kind == FlowKind::Ordinal) os << "levels = " << cfg.spec.flow.levels << "\n";
  auto terms = [&](const std::vector<TermSpec>& ts) {
    return list(ts, [&](const TermSpec& t) { return quoted(format_term(t, names)); });
  };
  os << "\n[location]\nterms = " << terms(cfg.spec.location) << "\n";
  if (!cfg.spec.scale.empty()) os << "\n[scale]\nterms = " << terms(cfg.spec.scale) << "\n";
  const auto& t = cfg.train;
  auto num = [](double v) {
    std::ostringstream s;
    s << std::setprecision(17) << v;
    std::string out = s.str();
    if (out.find_first_of(".eE") == std::string::npos) out += ".0";
    return out;
  };
  os << "\n[training]\n"
     << "learning_rate = " << num(t.learning_rate) << "\n"
     << "decay = " << num(t.decay) << "\n"
     << "epochs = " << t.epochs << "\n"
     << "batch_size = " << t.batch_size << "\n"
     << "validation_fraction = " << num(t.validation_fraction) << "\n"
     << "patience = " << t.patience << "\n"
     << "seed = " << t.seed << "\n"
     << "init = " << quoted(std::string(to_string(t.init))) << "\n"
     << "clip_norm = " << num(t.clip_norm) << "\n";
  return os.str();
}

}  // namespace drift
