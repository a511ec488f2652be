#include "drift/dataio.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "drift/basedist.hpp"
#include "drift/init.hpp"

namespace drift {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// name(arg, arg, ...) -> {name, args}
std::pair<std::string, std::vector<std::string>> parse_call(const std::string& text) {
  const std::string t = trim(text);
  const auto open = t.find('(');
  if (open == std::string::npos || t.back() != ')')
    throw ConfigError("expected name(args): '" + t + "'");
  std::vector<std::string> args;
  std::string inner = t.substr(open + 1, t.size() - open - 2);
  std::size_t start = 0;
  for (std::size_t i = 0; i <= inner.size(); ++i) {
    if (i == inner.size() || inner[i] == ',') {
      args.push_back(trim(std::string_view(inner).substr(start, i - start)));
      start = i + 1;
    }
  }
  return {trim(std::string_view(t).substr(0, open)), args};
}

bool parse_double(const std::string& cell, double& out, bool allow_inf) {
  const std::string t = trim(cell);
  if (t.empty()) return false;
  if (allow_inf) {
    const std::string l = lower(t);
    if (l == "inf" || l == "+inf") {
      out = kInf;
      return true;
    }
    if (l == "-inf") {
      out = -kInf;
      return true;
    }
  }
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (*first == '+') ++first;
  const auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last && std::isfinite(out);
}

int month_number(const std::string& cell) {
  static const std::array<const char*, 12> names = {"jan", "feb", "mar", "apr", "may", "jun",
                                                    "jul", "aug", "sep", "oct", "nov", "dec"};
  const std::string l = lower(trim(cell)).substr(0, 3);
  for (std::size_t i = 0; i < names.size(); ++i)
    if (l == names[i]) return static_cast<int>(i) + 1;
  return 0;
}

int weekday_number(const std::string& cell) {
  static const std::array<const char*, 7> names = {"mon", "tue", "wed", "thu", "fri", "sat", "sun"};
  const std::string l = lower(trim(cell)).substr(0, 3);
  for (std::size_t i = 0; i < names.size(); ++i)
    if (l == names[i]) return static_cast<int>(i) + 1;
  return 0;
}

struct Record {
  std::vector<std::string> fields;
  std::size_t line;
};

std::vector<Record> parse_records(const std::string& text, char delimiter) {
  std::vector<Record> records;
  Record cur{{}, 1};
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;
  auto end_field = [&] {
    cur.fields.push_back(field);
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    const bool blank = cur.fields.size() == 1 && trim(cur.fields[0]).empty();
    if (!blank) records.push_back(cur);
    cur = Record{{}, line};
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (c == delimiter) {
      end_field();
    } else if (c == '\r') {
      // CRLF line endings
    } else if (c == '\n') {
      ++line;
      end_record();
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  if (in_quotes) throw ParseError("unterminated quoted field", cur.line);
  if (!field.empty() || !cur.fields.empty()) end_record();
  return records;
}

}  // namespace

OutcomeSpec parse_outcome_spec(const std::string& text) {
  const auto [name, args] = parse_call(text);
  OutcomeSpec s;
  if (name == "continuous" && args.size() == 1) {
    s.kind = OutcomeKind::Continuous;
    s.column = args[0];
  } else if ((name == "ordinal" || name == "count") && args.size() == 2) {
    s.kind = OutcomeKind::Ordinal;
    s.column = args[0];
    s.counts = name == "count";
    try {
      s.levels = std::stoi(args[1]);
    } catch (const std::exception&) {
      throw ConfigError(name + " outcome needs an integer level count: '" + text + "'");
    }
    if (s.levels < 2) throw ConfigError(name + " outcome needs at least 2 levels");
  } else if (name == "survival" && args.size() == 2) {
    s.kind = OutcomeKind::Survival;
    s.column = args[0];
    s.column2 = args[1];
  } else if (name == "interval" && args.size() == 2) {
    s.kind = OutcomeKind::Interval;
    s.column = args[0];
    s.column2 = args[1];
  } else {
    throw ConfigError("cannot parse outcome '" + text +
                      "' (continuous(col) | ordinal(col, K) | count(col, K) | "
                      "survival(time, status) | interval(lo, hi))");
  }
  return s;
}

std::string format_outcome_spec(const OutcomeSpec& s) {
  switch (s.kind) {
    case OutcomeKind::Continuous: return "continuous(" + s.column + ")";
    case OutcomeKind::Ordinal:
      return (s.counts ? "count(" : "ordinal(") + s.column + ", " + std::to_string(s.levels) + ")";
    case OutcomeKind::Survival: return "survival(" + s.column + ", " + s.column2 + ")";
    case OutcomeKind::Interval: return "interval(" + s.column + ", " + s.column2 + ")";
  }
  return "?";
}

ColumnTransform parse_transform(const std::string& text) {
  const auto [name, args] = parse_call(text);
  if (args.size() != 1) throw ConfigError("transform takes one column: '" + text + "'");
  using K = ColumnTransform::Kind;
  static const std::map<std::string, K> kinds = {{"log", K::Log},
                                                 {"log1p", K::Log1p},
                                                 {"submin", K::SubtractMin},
                                                 {"month", K::MonthNumber},
                                                 {"weekday", K::WeekdayNumber}};
  const auto it = kinds.find(name);
  if (it == kinds.end()) throw ConfigError("unknown transform '" + name + "'");
  return {it->second, args[0]};
}

std::string format_transform(const ColumnTransform& t) {
  using K = ColumnTransform::Kind;
  switch (t.kind) {
    case K::Log: return "log(" + t.column + ")";
    case K::Log1p: return "log1p(" + t.column + ")";
    case K::SubtractMin: return "submin(" + t.column + ")";
    case K::MonthNumber: return "month(" + t.column + ")";
    case K::WeekdayNumber: return "weekday(" + t.column + ")";
  }
  return "?";
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
  Dataset out;
  out.feature_names = feature_names;
  out.kind = kind;
  out.features.reserve(rows.size() * num_features());
  out.outcomes.reserve(rows.size());
  for (auto r : rows) out.push_back(row(r), outcomes[r]);
  return out;
}

void Dataset::push_back(std::span<const double> x, Outcome y) {
  if (x.size() != num_features()) throw DataError("row has the wrong number of features");
  features.insert(features.end(), x.begin(), x.end());
  outcomes.push_back(y);
}

SurvivalData survival_view(const Dataset& data) {
  SurvivalData s;
  s.times.reserve(data.size());
  s.events.reserve(data.size());
  for (const auto& o : data.outcomes) {
    if (const auto* e = std::get_if<Exact>(&o)) {
      s.times.push_back(e->y);
      s.events.push_back(1);
    } else if (const auto* iv = std::get_if<Interval>(&o); iv && std::isinf(iv->hi) && iv->hi > 0 &&
                                                           std::isfinite(iv->lo)) {
      s.times.push_back(iv->lo);
      s.events.push_back(0);
    } else {
      throw DataError("survival view requires exact or right-censored outcomes");
    }
  }
  return s;
}

Dataset read_csv(std::istream& in, const DatasetSchema& schema) {
  std::stringstream buf;
  buf << in.rdbuf();
  const auto records = parse_records(buf.str(), schema.delimiter);
  if (records.empty()) throw ParseError("missing header row", 1);

  const auto& header = records[0].fields;
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < header.size(); ++i) index[trim(header[i])] = i;

  const auto& os = schema.outcome;
  std::vector<std::string> wanted = schema.features;
  wanted.push_back(os.column);
  if (os.kind == OutcomeKind::Survival || os.kind == OutcomeKind::Interval)
    wanted.push_back(os.column2);
  for (const auto& c : wanted)
    if (!index.count(c)) throw MissingColumn(c);
  // Duplicate names are allowed in `wanted` (a feature may double as outcome).

  const std::size_t n = records.size() - 1;
  std::map<std::string, std::vector<double>> cols;
  for (const auto& c : wanted) {
    if (cols.count(c)) continue;
    const bool allow_inf = os.kind == OutcomeKind::Interval && (c == os.column || c == os.column2);
    const auto tr = std::find_if(schema.transforms.begin(), schema.transforms.end(), [&](const auto& t) {
      return t.column == c && (t.kind == ColumnTransform::Kind::MonthNumber ||
                               t.kind == ColumnTransform::Kind::WeekdayNumber);
    });
    std::vector<double> v(n);
    for (std::size_t r = 0; r < n; ++r) {
      const auto& rec = records[r + 1];
      if (rec.fields.size() != header.size())
        throw ParseError("line " + std::to_string(rec.line) + ": expected " +
                             std::to_string(header.size()) + " fields, got " +
                             std::to_string(rec.fields.size()),
                         rec.line);
      const std::string& cell = rec.fields[index[c]];
      if (tr != schema.transforms.end()) {
        const int k = tr->kind == ColumnTransform::Kind::MonthNumber ? month_number(cell)
                                                                     : weekday_number(cell);
        if (k == 0)
          throw ParseError("line " + std::to_string(rec.line) + ": cannot map '" + cell +
                               "' in column '" + c + "'",
                           rec.line);
        v[r] = k;
      } else if (!parse_double(cell, v[r], allow_inf)) {
        throw ParseError("line " + std::to_string(rec.line) + ": cannot parse '" + cell +
                             "' in column '" + c + "'",
                         rec.line);
      }
    }
    for (const auto& t : schema.transforms) {
      if (t.column != c) continue;
      using K = ColumnTransform::Kind;
      if (t.kind == K::SubtractMin) {
        const double m = v.empty() ? 0.0 : *std::min_element(v.begin(), v.end());
        for (auto& x : v) x -= m;
      } else if (t.kind == K::Log || t.kind == K::Log1p) {
        for (std::size_t r = 0; r < n; ++r) {
          const double arg = t.kind == K::Log ? v[r] : 1.0 + v[r];
          if (!(arg > 0.0))
            throw ParseError("line " + std::to_string(records[r + 1].line) + ": " +
                                 format_transform(t) + " of a non-positive value",
                             records[r + 1].line);
          v[r] = std::log(arg);
        }
      }
    }
    cols[c] = std::move(v);
  }

  Dataset data;
  data.feature_names = schema.features;
  data.kind = os.kind;
  data.features.reserve(n * schema.features.size());
  data.outcomes.reserve(n);
  std::vector<double> row(schema.features.size());
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t line = records[r + 1].line;
    auto fail = [&](const std::string& msg) {
      throw ParseError("line " + std::to_string(line) + ": " + msg, line);
    };
    for (std::size_t j = 0; j < schema.features.size(); ++j) row[j] = cols[schema.features[j]][r];
    const double a = cols[os.column][r];
    Outcome y;
    switch (os.kind) {
      case OutcomeKind::Continuous:
        y = Exact{a};
        break;
      case OutcomeKind::Ordinal: {
        if (os.counts) {
          if (a != std::floor(a) || a < 0)
            fail("count value " + trim(records[r + 1].fields[index[os.column]]) +
                 " is not a non-negative integer");
          y = Discrete{static_cast<int>(std::min(a, static_cast<double>(os.levels - 1))) + 1};
          break;
        }
        if (a != std::floor(a) || a < 1 || a > os.levels)
          fail("ordinal value " + trim(records[r + 1].fields[index[os.column]]) +
               " outside 1.." + std::to_string(os.levels));
        y = Discrete{static_cast<int>(a)};
        break;
      }
      case OutcomeKind::Survival: {
        const double status = cols[os.column2][r];
        if (status != 0.0 && status != 1.0)
          fail("status must be 0 or 1, got " + trim(records[r + 1].fields[index[os.column2]]));
        if (a < 0.0) fail("survival time must be non-negative");
        y = survival_outcome(a, status == 1.0);
        break;
      }
      case OutcomeKind::Interval: {
        const double b = cols[os.column2][r];
        if (!(a < b)) fail("interval requires lo < hi");
        if (std::isinf(a) && std::isinf(b)) {
          y = Interval{a, b};
        } else if (a == b || (std::isinf(a) && a > 0) || (std::isinf(b) && b < 0)) {
          fail("invalid interval bounds");
        } else {
          y = Interval{a, b};
        }
        break;
      }
    }
    data.push_back(row, y);
  }
  return data;
}

Dataset load_csv(const std::string& path, const DatasetSchema& schema) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open data file '" + path + "'");
  return read_csv(in, schema);
}

std::vector<std::string> split_csv_record(const std::string& record, char delimiter) {
  const auto recs = parse_records(record, delimiter);
  if (recs.empty()) return {};
  return recs[0].fields;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  return out + "\"";
}

namespace {

std::string fmt_double(double v) {
  if (std::isinf(v)) return v > 0 ? "+inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

void write_dataset_csv(std::ostream& out, const Dataset& data,
                       const std::vector<std::string>& outcome_columns) {
  for (std::size_t j = 0; j < data.num_features(); ++j)
    out << (j ? "," : "") << csv_escape(data.feature_names[j]);
  for (const auto& c : outcome_columns) out << "," << csv_escape(c);
  out << "\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto x = data.row(i);
    for (std::size_t j = 0; j < x.size(); ++j) out << (j ? "," : "") << fmt_double(x[j]);
    const auto& o = data.outcomes[i];
    if (data.kind == OutcomeKind::Survival) {
      const bool event = std::holds_alternative<Exact>(o);
      const double t = event ? std::get<Exact>(o).y : std::get<Interval>(o).lo;
      out << "," << fmt_double(t) << "," << (event ? 1 : 0);
    } else if (const auto* e = std::get_if<Exact>(&o)) {
      out << "," << fmt_double(e->y);
    } else if (const auto* d = std::get_if<Discrete>(&o)) {
      out << "," << d->level;
    } else {
      const auto& iv = std::get<Interval>(o);
      out << "," << fmt_double(iv.lo) << "," << fmt_double(iv.hi);
    }
    out << "\n";
  }
}

Standardizer::Standardizer(std::vector<double> means, std::vector<double> sds)
    : means_(std::move(means)), sds_(std::move(sds)) {
  if (means_.size() != sds_.size()) throw ConfigError("standardizer size mismatch");
  for (double s : sds_)
    if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("standardizer sd must be positive");
}

Standardizer Standardizer::fit(const Dataset& data) {
  const std::size_t d = data.num_features();
  std::vector<double> means(d, 0.0);
  std::vector<double> sds(d, 1.0);
  const std::size_t n = data.size();
  if (n == 0) return Standardizer(means, sds);
  for (std::size_t j = 0; j < d; ++j) {
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) m += data.row(i)[j];
    m /= static_cast<double>(n);
    double v = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double e = data.row(i)[j] - m;
      v += e * e;
    }
    v /= static_cast<double>(n);
    means[j] = m;
    sds[j] = v > 0.0 ? std::sqrt(v) : 1.0;
  }
  return Standardizer(means, sds);
}

Standardizer Standardizer::identity(std::size_t n_features) {
  return Standardizer(std::vector<double>(n_features, 0.0), std::vector<double>(n_features, 1.0));
}

void Standardizer::apply(std::span<const double> raw, std::span<double> out) const {
  if (raw.size() != means_.size() || out.size() != means_.size())
    throw DataError("feature dimension mismatch: model expects " + std::to_string(means_.size()) +
                    ", got " + std::to_string(raw.size()));
  for (std::size_t j = 0; j < raw.size(); ++j) out[j] = (raw[j] - means_[j]) / sds_[j];
}

std::vector<double> Standardizer::apply(std::span<const double> raw) const {
  std::vector<double> out(raw.size());
  apply(raw, out);
  return out;
}

std::vector<double> Standardizer::invert(std::span<const double> z) const {
  if (z.size() != means_.size()) throw DataError("feature dimension mismatch");
  std::vector<double> out(z.size());
  for (std::size_t j = 0; j < z.size(); ++j) out[j] = z[j] * sds_[j] + means_[j];
  return out;
}

double Standardizer::apply(std::size_t j, double raw) const { return (raw - means_.at(j)) / sds_.at(j); }
double Standardizer::invert(std::size_t j, double z) const { return z * sds_.at(j) + means_.at(j); }

std::vector<Fold> kfold(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (k < 1) throw DataError("kfold needs k >= 1");
  if (k > n) throw DataError("kfold: k = " + std::to_string(k) + " exceeds n = " + std::to_string(n));
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<Fold> folds(k);
  std::vector<std::size_t> fold_of(n);
  for (std::size_t i = 0; i < n; ++i) fold_of[perm[i]] = i % k;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t f = 0; f < k; ++f) (fold_of[r] == f ? folds[f].test : folds[f].train).push_back(r);
  return folds;
}

// ---------------------------------------------------------------------------

namespace example2 {

namespace {

constexpr double kLogHalf = -0.69314718055994530942;

double logsumexp(double a, double b) {
  const double m = std::max(a, b);
  if (std::isinf(m)) return m;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

}  // namespace

double mu(double x) { return std::exp(1.0 - std::exp(-x)) - 1.0; }
double sigma(double x) { return std::sqrt(std::exp(x)); }

double mixture_log_pdf(double y) {
  const BaseDistribution n(BaseKind::Normal);
  return logsumexp(kLogHalf + n.log_pdf(y + 2.0), kLogHalf + n.log_pdf(y - 2.0));
}

double mixture_log_cdf(double y) {
  return logsumexp(kLogHalf + normal_log_cdf(y + 2.0), kLogHalf + normal_log_cdf(y - 2.0));
}

double mixture_log_survival(double y) {
  return logsumexp(kLogHalf + normal_log_cdf(-y - 2.0), kLogHalf + normal_log_cdf(-y + 2.0));
}

double reference_inverse(double y) { return mixture_log_cdf(y) - mixture_log_survival(y); }

double reference_flow(double z) {
  double lo = -60.0;
  double hi = 60.0;
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    if (reference_inverse(mid) < z) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

double oracle_log_density(double y, double x) {
  const BaseDistribution logistic(BaseKind::Logistic);
  const double z = reference_inverse(y);
  const double s = sigma(x);
  return logistic.log_pdf((z - mu(x)) / s) - std::log(s) + mixture_log_pdf(y) - logistic.log_pdf(z);
}

double oracle_density(double y, double x) { return std::exp(oracle_log_density(y, x)); }

}  // namespace example2

Dataset gen_example2(std::size_t n, std::uint64_t seed, double x_lo, double x_hi) {
  Dataset d;
  d.feature_names = {"x"};
  d.kind = OutcomeKind::Continuous;
  Rng rng(seed);
  const BaseDistribution logistic(BaseKind::Logistic);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = uniform(rng, x_lo, x_hi);
    double u = uniform(rng, 0.0, 1.0);
    while (u <= 0.0) u = uniform(rng, 0.0, 1.0);
    const double eps = logistic.quantile(u);
    const double y = example2::reference_flow(example2::sigma(x) * eps + example2::mu(x));
    d.push_back(std::span<const double>(&x, 1), Exact{y});
  }
  return d;
}

double oracle_logscore(const Dataset& data) {
  if (data.size() == 0) throw DataError("oracle log-score of an empty dataset");
  double s = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i)
    s += example2::oracle_log_density(std::get<Exact>(data.outcomes[i]).y, data.row(i)[0]);
  return s / static_cast<double>(data.size());
}

Dataset gen_linear_gaussian(std::size_t n, std::uint64_t seed) {
  Dataset d;
  d.feature_names = {"x"};
  d.kind = OutcomeKind::Continuous;
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = normal(rng);
    const double y = 1.0 + 2.0 * x + 0.5 * normal(rng);
    d.push_back(std::span<const double>(&x, 1), Exact{y});
  }
  return d;
}

Dataset gen_ordinal(std::size_t n, std::uint64_t seed) {
  Dataset d;
  d.feature_names = {"x1", "x2"};
  d.kind = OutcomeKind::Ordinal;
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const BaseDistribution logistic(BaseKind::Logistic);
  constexpr std::array<double, 3> cuts = {-1.5, 0.0, 1.5};
  for (std::size_t i = 0; i < n; ++i) {
    const std::array<double, 2> x = {normal(rng), normal(rng)};
    double u = uniform(rng, 0.0, 1.0);
    while (u <= 0.0) u = uniform(rng, 0.0, 1.0);
    const double latent = 1.0 * x[0] - 0.5 * x[1] + logistic.quantile(u);
    int level = 1;
    for (double c : cuts)
      if (latent > c) ++level;
    d.push_back(x, Discrete{level});
  }
  return d;
}

Dataset gen_survival_ph(std::size_t n, std::uint64_t seed, double censor_fraction) {
  if (!(censor_fraction >= 0.0 && censor_fraction < 1.0))
    throw ConfigError("censoring fraction must lie in [0, 1)");
  Dataset d;
  d.feature_names = {"x1", "x2"};
  d.kind = OutcomeKind::Survival;
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  constexpr double shape = 1.5;
  std::vector<std::array<double, 2>> xs(n);
  std::vector<double> event_times(n);
  std::vector<double> censor_draws(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = {normal(rng), normal(rng)};
    const double lp = 0.8 * xs[i][0] - 0.5 * xs[i][1];
    double u = uniform(rng, 0.0, 1.0);
    while (u <= 0.0) u = uniform(rng, 0.0, 1.0);
    // Lambda(t | x) = t^shape * exp(lp)
    event_times[i] = std::pow(-std::log(u) / std::exp(lp), 1.0 / shape);
    double v = uniform(rng, 0.0, 1.0);
    while (v <= 0.0) v = uniform(rng, 0.0, 1.0);
    censor_draws[i] = -std::log(v);  // unit exponential, scaled by 1/rate below
  }
  auto censored_fraction = [&](double rate) {
    std::size_t c = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (censor_draws[i] / rate < event_times[i]) ++c;
    return static_cast<double>(c) / static_cast<double>(std::max<std::size_t>(n, 1));
  };
  double rate = 0.0;
  if (censor_fraction > 0.0) {
    double lo = 1e-6;
    double hi = 1e3;
    for (int it = 0; it < 200; ++it) {
      const double mid = std::sqrt(lo * hi);
      if (censored_fraction(mid) < censor_fraction) lo = mid;
      else hi = mid;
    }
    rate = std::sqrt(lo * hi);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double c = rate > 0.0 ? censor_draws[i] / rate : kInf;
    const bool event = event_times[i] <= c;
    d.push_back(xs[i], survival_outcome(event ? event_times[i] : c, event));
  }
  return d;
}

}  // namespace drift
