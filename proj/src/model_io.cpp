#include "drift/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace drift {

using nlohmann::json;

namespace {

json report_json(const FitReport& r, bool with_time) {
  json j = {{"train_nll", r.train_nll},     {"val_nll", r.val_nll},
            {"best_epoch", r.best_epoch},   {"epochs_run", r.epochs_run},
            {"stop_reason", r.stop_reason}, {"n_train", r.n_train},
            {"n_validation", r.n_validation}};
  if (with_time) j["seconds"] = r.seconds;
  return j;
}

FitReport report_from(const json& j) {
  FitReport r;
  r.train_nll = j.at("train_nll").get<std::vector<double>>();
  r.val_nll = j.at("val_nll").get<std::vector<double>>();
  r.best_epoch = j.at("best_epoch").get<int>();
  r.epochs_run = j.at("epochs_run").get<int>();
  r.stop_reason = j.at("stop_reason").get<std::string>();
  r.n_train = j.at("n_train").get<std::size_t>();
  r.n_validation = j.at("n_validation").get<std::size_t>();
  if (j.contains("seconds")) r.seconds = j.at("seconds").get<double>();
  return r;
}

}  // namespace

std::string model_to_json(const SavedModel& m) {
  const auto& spec = m.model.spec();
  const auto& names = spec.feature_names;
  auto terms = [&](const std::vector<TermSpec>& ts) {
    json a = json::array();
    for (const auto& t : ts) a.push_back(format_term(t, names));
    return a;
  };
  json transforms = json::array();
  for (const auto& t : m.schema.transforms) transforms.push_back(format_transform(t));
  const auto& c = m.model.calibration();
  const auto& t = m.train;
  json j = {
      {"format", "drift-model"},
      {"version", kModelFormatVersion},
      {"spec",
       {{"base", to_string(spec.base)},
        {"flow",
         {{"kind", to_string(spec.flow.kind)},
          {"hidden", spec.flow.hidden},
          {"order", spec.flow.order},
          {"levels", spec.flow.levels}}},
        {"location", terms(spec.location)},
        {"scale", terms(spec.scale)},
        {"features", names},
        {"outcome", format_outcome_spec(spec.outcome)}}},
      {"transforms", transforms},
      {"delimiter", std::string(1, m.schema.delimiter)},
      {"training",
       {{"learning_rate", t.learning_rate},
        {"decay", t.decay},
        {"epochs", t.epochs},
        {"batch_size", t.batch_size},
        {"validation_fraction", t.validation_fraction},
        {"patience", t.patience},
        {"seed", t.seed},
        {"init", to_string(t.init)},
        {"clip_norm", t.clip_norm}}},
      {"calibration", {{"shift", c.shift}, {"scale", c.scale}, {"lo", c.lo}, {"hi", c.hi}}},
      {"standardizer",
       {{"means", m.model.standardizer().means()}, {"sds", m.model.standardizer().sds()}}},
      {"params", m.model.params()},
      {"report", m.report ? report_json(*m.report, false) : json(nullptr)},
  };
  return j.dump(1) + "\n";
}

SavedModel model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("model file is not valid JSON: ") + e.what());
  }
  try {
    if (j.at("format").get<std::string>() != "drift-model")
      throw ConfigError("not a drift model file");
    const int version = j.at("version").get<int>();
    if (version != kModelFormatVersion)
      throw ConfigError("unsupported model file version " + std::to_string(version));

    const auto& js = j.at("spec");
    ModelSpec spec;
    spec.base = parse_base_kind(js.at("base").get<std::string>());
    const auto& jf = js.at("flow");
    spec.flow.kind = parse_flow_kind(jf.at("kind").get<std::string>());
    spec.flow.hidden = jf.at("hidden").get<std::vector<int>>();
    spec.flow.order = jf.at("order").get<int>();
    spec.flow.levels = jf.at("levels").get<int>();
    spec.feature_names = js.at("features").get<std::vector<std::string>>();
    spec.outcome = parse_outcome_spec(js.at("outcome").get<std::string>());
    spec.location = parse_terms(js.at("location").get<std::vector<std::string>>(), spec.feature_names);
    spec.scale = parse_terms(js.at("scale").get<std::vector<std::string>>(), spec.feature_names);

    DatasetSchema schema;
    schema.features = spec.feature_names;
    schema.outcome = spec.outcome;
    for (const auto& t : j.at("transforms")) schema.transforms.push_back(parse_transform(t.get<std::string>()));
    const auto delim = j.at("delimiter").get<std::string>();
    if (delim.size() != 1) throw ConfigError("model file delimiter must be one character");
    schema.delimiter = delim[0];

    TrainConfig tc;
    const auto& jt = j.at("training");
    tc.learning_rate = jt.at("learning_rate").get<double>();
    tc.decay = jt.at("decay").get<double>();
    tc.epochs = jt.at("epochs").get<int>();
    tc.batch_size = jt.at("batch_size").get<std::size_t>();
    tc.validation_fraction = jt.at("validation_fraction").get<double>();
    tc.patience = jt.at("patience").get<int>();
    tc.seed = jt.at("seed").get<std::uint64_t>();
    tc.init = parse_init_scheme(jt.at("init").get<std::string>());
    tc.clip_norm = jt.at("clip_norm").get<double>();

    const auto& jc = j.at("calibration");
    FlowCalibration cal{jc.at("shift").get<double>(), jc.at("scale").get<double>(),
                        jc.at("lo").get<double>(), jc.at("hi").get<double>()};
    const auto& jstd = j.at("standardizer");
    Standardizer standardizer(jstd.at("means").get<std::vector<double>>(),
                              jstd.at("sds").get<std::vector<double>>());

    DriftModel model(std::move(spec), cal, std::move(standardizer));
    model.set_params(j.at("params").get<std::vector<double>>());
    std::optional<FitReport> report;
    if (!j.at("report").is_null()) report = report_from(j.at("report"));
    return SavedModel{std::move(model), std::move(schema), tc, std::move(report)};
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const std::string& path, const SavedModel& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write model file '" + path + "'");
  out << model_to_json(m);
}

SavedModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open model file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

std::string report_to_json(const FitReport& r) { return report_json(r, true).dump(1) + "\n"; }

}  // namespace drift
