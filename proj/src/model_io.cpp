#include "ppfa/model_io.hpp"

#include "ppfa/error.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace ppfa {

namespace {

using json = nlohmann::ordered_json;

constexpr const char* kFormat = "ppfa-model";
constexpr int kVersion = 1;

json vector_json(const Eigen::VectorXd& v)
{
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) {
    a.push_back(v(i));
  }
  return a;
}

json matrix_json(const Eigen::MatrixXd& m)
{
  json a = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    a.push_back(vector_json(m.row(i).transpose()));
  }
  return a;
}

const json& field(const json& obj, const std::string& key, const std::string& where)
{
  if (!obj.is_object() || !obj.contains(key)) {
    throw config_error("model file: missing field '" + where + key + "'");
  }
  return obj.at(key);
}

Eigen::VectorXd read_vector(const json& obj, const std::string& key, Index size,
                            const std::string& where = "")
{
  const json& a = field(obj, key, where);
  if (!a.is_array() || static_cast<Index>(a.size()) != size) {
    throw config_error("model file: field '" + where + key + "' must have " +
                       std::to_string(size) + " entries");
  }
  Eigen::VectorXd v(size);
  for (Index i = 0; i < size; ++i) {
    if (!a[i].is_number()) {
      throw config_error("model file: field '" + where + key + "' holds a non-number");
    }
    v(i) = a[i].get<double>();
  }
  return v;
}

Eigen::MatrixXd read_matrix(const json& obj, const std::string& key, Index rows,
                            Index cols, const std::string& where = "")
{
  const json& a = field(obj, key, where);
  if (!a.is_array() || static_cast<Index>(a.size()) != rows) {
    throw config_error("model file: field '" + where + key + "' must have " +
                       std::to_string(rows) + " rows");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    json wrapper = {{"row", a[i]}};
    m.row(i) = read_vector(wrapper, "row", cols, where + key + "[" + std::to_string(i) + "].")
                 .transpose();
  }
  return m;
}

Index read_dim(const json& obj, const std::string& key)
{
  const json& v = field(obj, key, "");
  if (!v.is_number_integer() || v.get<long long>() < 1) {
    throw config_error("model file: field '" + key + "' must be a positive integer");
  }
  return static_cast<Index>(v.get<long long>());
}

double read_scalar(const json& obj, const std::string& key, const std::string& where)
{
  const json& v = field(obj, key, where);
  if (!v.is_number()) {
    throw config_error("model file: field '" + where + key + "' must be a number");
  }
  return v.get<double>();
}

} // namespace

std::string model_to_string(const PpfaModel& model)
{
  const ModelParams& p = model.params;
  json j;
  j["format"] = kFormat;
  j["version"] = kVersion;
  j["m"] = p.m();
  j["r"] = p.r();
  j["s"] = p.s();
  j["beta"] = matrix_json(p.beta);
  j["H"] = matrix_json(p.H);
  j["tau2"] = vector_json(p.tau2);
  j["sigma2"] = vector_json(p.sigma2);
  j["whitening"] = {{"mean", vector_json(model.whitening.mean)},
                    {"eigvecs", matrix_json(model.whitening.eigvecs)},
                    {"singvals", vector_json(model.whitening.singvals)}};
  j["dynamics"] = {{"D", matrix_json(model.dynamics.D)}};
  const ControlLimits& l = model.limits;
  j["limits"] = {{"alpha", l.alpha},
                 {"psi_T2", l.psi_t2},
                 {"psi_SPE", l.psi_spe},
                 {"psi_DI", l.psi_di},
                 {"bandwidth_T2", l.bandwidth_t2},
                 {"bandwidth_SPE", l.bandwidth_spe},
                 {"bandwidth_DI", l.bandwidth_di}};
  return j.dump(2) + "\n";
}

PpfaModel model_from_string(const std::string& text)
{
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw config_error(std::string("model file: malformed JSON: ") + e.what());
  }
  if (!j.is_object() || j.value("format", std::string()) != kFormat) {
    throw config_error("model file: not a ppfa-model document");
  }
  if (j.value("version", 0) != kVersion) {
    throw config_error("model file: unsupported version");
  }
  const Index m = read_dim(j, "m");
  const Index r = read_dim(j, "r");
  const Index s = read_dim(j, "s");

  PpfaModel model;
  ModelParams& p = model.params;
  p.beta = read_matrix(j, "beta", s, r);
  p.H = read_matrix(j, "H", m, r);
  p.tau2 = read_vector(j, "tau2", r);
  p.sigma2 = read_vector(j, "sigma2", m);

  const json& w = field(j, "whitening", "");
  model.whitening.mean = read_vector(w, "mean", m, "whitening.");
  model.whitening.eigvecs = read_matrix(w, "eigvecs", m, m, "whitening.");
  model.whitening.singvals = read_vector(w, "singvals", m, "whitening.");
  if ((model.whitening.singvals.array() <= 0.0).any()) {
    throw config_error("model file: whitening singular values must be positive");
  }

  const json& d = field(j, "dynamics", "");
  model.dynamics.D = read_matrix(d, "D", r * s, r * s, "dynamics.");

  const json& l = field(j, "limits", "");
  model.limits.alpha = read_scalar(l, "alpha", "limits.");
  model.limits.psi_t2 = read_scalar(l, "psi_T2", "limits.");
  model.limits.psi_spe = read_scalar(l, "psi_SPE", "limits.");
  model.limits.psi_di = read_scalar(l, "psi_DI", "limits.");
  model.limits.bandwidth_t2 = read_scalar(l, "bandwidth_T2", "limits.");
  model.limits.bandwidth_spe = read_scalar(l, "bandwidth_SPE", "limits.");
  model.limits.bandwidth_di = read_scalar(l, "bandwidth_DI", "limits.");

  validate(p);
  return model;
}

void save_model(const PpfaModel& model, const std::filesystem::path& path)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorCategory::io, "cannot open '" + path.string() + "' for writing");
  }
  out << model_to_string(model);
  if (!out) {
    throw Error(ErrorCategory::io, "failed writing '" + path.string() + "'");
  }
}

PpfaModel load_model(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCategory::io, "cannot open model file '" + path.string() + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_string(buf.str());
}

} // namespace ppfa
