#include "etsm/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace etsm {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& key, const std::string& what) {
  throw ConfigError("config key '" + key + "': " + what);
}

double number(const json& value, const std::string& key) {
  if (!value.is_number()) fail(key, "expected a number, got " + std::string(value.type_name()));
  return value.get<double>();
}

const json& required(const json& doc, const std::string& key) {
  auto it = doc.find(key);
  if (it == doc.end()) fail(key, "missing");
  return *it;
}

Vector vector_of(const json& value, const std::string& key) {
  if (value.is_number()) return Vector::Constant(1, value.get<double>());
  if (!value.is_array()) fail(key, "expected an array of numbers");
  // Accept a single-row nested array as well.
  if (value.size() == 1 && value[0].is_array()) return vector_of(value[0], key);
  Vector v(static_cast<Eigen::Index>(value.size()));
  for (std::size_t i = 0; i < value.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = number(value[i], key + "[" + std::to_string(i) + "]");
  }
  return v;
}

Matrix matrix_of(const json& value, const std::string& key) {
  if (value.is_number()) return Matrix::Constant(1, 1, value.get<double>());
  if (!value.is_array() || value.empty()) fail(key, "expected a non-empty array of rows");
  const std::size_t rows = value.size();
  if (!value[0].is_array()) fail(key, "expected rows as arrays (row-major)");
  const std::size_t cols = value[0].size();
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const json& row = value[r];
    if (!row.is_array() || row.size() != cols) {
      std::ostringstream msg;
      msg << "row " << r << " has " << (row.is_array() ? row.size() : 0) << " entries, expected "
          << cols;
      fail(key, msg.str());
    }
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          number(row[c], key + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
    }
  }
  return m;
}

double scalar_of(const json& value, const std::string& key) {
  if (value.is_number()) return value.get<double>();
  const Matrix m = matrix_of(value, key);
  if (m.size() != 1) fail(key, "expected a scalar");
  return m(0, 0);
}

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

json vector_json(const Eigen::Ref<const Eigen::VectorXd>& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

// Rethrows validation failures as ConfigError naming the key.
template <typename F>
void check(const std::string& key, F&& f) {
  try {
    f();
  } catch (const std::invalid_argument& e) {
    fail(key, e.what());
  }
}

}  // namespace

SimConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config: top level must be an object");
  SimConfig config;
  config.model.A = matrix_of(required(doc, "A"), "A");
  const Eigen::Index n = config.model.A.rows();
  if (config.model.A.cols() != n) fail("A", "must be square");
  config.model.C = vector_of(required(doc, "C"), "C").transpose();
  if (config.model.C.size() != n) fail("C", "must have n = " + std::to_string(n) + " entries");
  config.model.Q = matrix_of(required(doc, "Q"), "Q");
  if (config.model.Q.rows() != n || config.model.Q.cols() != n) fail("Q", "must be n x n");
  config.model.R = scalar_of(required(doc, "R"), "R");
  config.trigger.threshold = number(required(doc, "Gamma"), "Gamma");
  config.trigger.error = number(required(doc, "Gamma_e"), "Gamma_e");

  check("Q", [&] { Ellipsoid(Vector::Zero(n), config.model.Q); });
  if (!(config.model.R > 0.0) || !std::isfinite(config.model.R)) fail("R", "must be positive and finite");
  check("A", [&] { config.model.validate(); });
  check("Gamma/Gamma_e", [&] { config.trigger.validate(); });

  if (auto it = doc.find("a"); it != doc.end()) {
    const Vector a = vector_of(*it, "a");
    if (a.size() != n) fail("a", "must have n = " + std::to_string(n) + " entries");
    check("a", [&] { config.a = WeightVector(a); });
  } else {
    config.a = WeightVector::uniform(n);
  }
  if (auto it = doc.find("x0"); it != doc.end()) {
    config.x0 = vector_of(*it, "x0");
    if (config.x0.size() != n) fail("x0", "must have n = " + std::to_string(n) + " entries");
  } else {
    config.x0 = Vector::Zero(n);
  }
  if (auto it = doc.find("N"); it != doc.end()) {
    if (!it->is_number_integer()) fail("N", "expected an integer");
    config.N = it->get<std::int64_t>();
    if (config.N < n) fail("N", "must be at least n");
  }
  if (auto it = doc.find("seed"); it != doc.end()) {
    if (!it->is_number_unsigned()) fail("seed", "expected a non-negative integer");
    config.seed = it->get<std::uint64_t>();
  }
  return config;
}

SimConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return parse_config(doc);
}

SimConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_config_text(buffer.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

json config_to_json(const SimConfig& config) {
  json doc;
  doc["A"] = matrix_json(config.model.A);
  doc["C"] = vector_json(config.model.C.transpose());
  doc["Q"] = matrix_json(config.model.Q);
  doc["R"] = config.model.R;
  doc["Gamma"] = config.trigger.threshold;
  doc["Gamma_e"] = config.trigger.error;
  doc["a"] = vector_json(config.a.values());
  doc["x0"] = vector_json(config.x0);
  doc["N"] = config.N;
  doc["seed"] = config.seed;
  return doc;
}

SimConfig reference_config() {
  SimConfig config;
  config.model.A.resize(2, 2);
  config.model.A << 0.75, 0.2, 0.5, 0.3;
  config.model.C.resize(2);
  config.model.C << 0.5, 0.5;
  config.model.Q = 5.0 * Matrix::Identity(2, 2);
  config.model.R = 0.5;
  config.trigger = {0.6, 1e-4};
  config.a = WeightVector::uniform(2);
  config.x0 = Vector::Zero(2);
  config.N = 200;
  config.seed = 0;
  return config;
}

}  // namespace etsm
