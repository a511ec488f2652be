#pragma once

// Run configuration in a TOML subset: [section] headers, `key = value` with
// strings, integers, floats, booleans and (possibly multi-line) arrays of
// those, and `#` comments.
//
//   [data]      features, outcome, transforms
//   [flow]      kind, base, hidden, order, levels
//   [location]  terms
//   [scale]     terms
//   [training]  learning_rate, decay, epochs, batch_size,
//               validation_fraction, patience, seed, init, clip_norm

#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "drift/dataio.hpp"
#include "drift/model.hpp"
#include "drift/training.hpp"

namespace drift {

namespace toml_lite {

struct Value;
using Array = std::vector<Value>;

struct Value {
  std::variant<std::string, std::int64_t, double, bool, Array> v;
  std::size_t line = 0;
};

using Table = std::map<std::string, Value>;

struct Document {
  std::map<std::string, Table> sections;  // "" holds keys before any header
};

// ConfigError with the line number on malformed input or duplicate keys.
Document parse(const std::string& text);

}  // namespace toml_lite

struct RunConfig {
  DatasetSchema schema;
  ModelSpec spec;
  TrainConfig train;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

// Inverse of parse_config.
std::string format_config(const RunConfig& cfg);

}  // namespace drift
