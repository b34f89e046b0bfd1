#include "agmm/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "agmm/error.hpp"
#include "json.hpp"

namespace agmm {

using nlohmann::json;

namespace {

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    rows.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, const char* what) {
  if (!j.is_array()) fail(ErrorKind::InvalidParams, std::string(what) + " must be an array of rows");
  std::vector<Vector> rows;
  for (const auto& row : j) {
    if (!row.is_array()) fail(ErrorKind::InvalidParams, std::string(what) + " rows must be arrays");
    rows.push_back(row.get<Vector>());
  }
  if (rows.empty()) return Matrix();
  for (const auto& r : rows)
    if (r.size() != rows.front().size())
      fail(ErrorKind::InvalidParams, std::string(what) + " rows have differing lengths");
  return Matrix::from_rows(rows);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_double(std::string_view field, std::size_t line) {
  field = trim(field);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(v))
    fail(ErrorKind::InvalidArgument,
         "line " + std::to_string(line) + ": bad number '" + std::string(field) + "'");
  return v;
}

template <class Fn>
auto with_path(const std::string& path, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

template <class T>
void get_if_present(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) fail(ErrorKind::Io, "read error on '" + path + "'");
  return ss.str();
}

void write_text(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot open '" + path + "' for writing");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) fail(ErrorKind::Io, "write error on '" + path + "'");
}

std::string params_to_json(const GmmParams& params) {
  json j;
  j["k"] = params.k;
  j["d"] = params.d;
  j["centers"] = matrix_json(params.centers);
  json cov;
  if (params.covariance.is_homogeneous()) {
    cov["kind"] = "homogeneous";
    cov["sigma"] = matrix_json(params.covariance.of(0));
  } else {
    cov["kind"] = "heterogeneous";
    json list = json::array();
    for (const Matrix& s : params.covariance.matrices()) list.push_back(matrix_json(s));
    cov["sigmas"] = list;
  }
  j["covariance"] = cov;
  return j.dump(2) + "\n";
}

GmmParams params_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    GmmParams p;
    p.k = j.at("k").get<std::size_t>();
    p.d = j.at("d").get<std::size_t>();
    p.centers = matrix_from_json(j.at("centers"), "centers");
    const json& cov = j.at("covariance");
    const std::string kind = cov.at("kind").get<std::string>();
    if (kind == "homogeneous") {
      p.covariance = CovarianceSpec::homogeneous(matrix_from_json(cov.at("sigma"), "sigma"));
    } else if (kind == "heterogeneous") {
      std::vector<Matrix> sigmas;
      for (const auto& s : cov.at("sigmas")) sigmas.push_back(matrix_from_json(s, "sigmas"));
      p.covariance = CovarianceSpec::heterogeneous(std::move(sigmas));
    } else {
      fail(ErrorKind::InvalidParams, "covariance kind must be homogeneous or heterogeneous, got '" + kind + "'");
    }
    validate(p);
    return p;
  } catch (const json::exception& e) {
    fail(ErrorKind::InvalidParams, std::string("malformed params: ") + e.what());
  }
}

GmmParams read_params(const std::string& path) {
  const std::string text = read_text(path);
  return with_path(path, [&] { return params_from_json(text); });
}

void write_params(const GmmParams& params, const std::string& path) { write_text(path, params_to_json(params)); }

std::string dataset_to_csv(const Matrix& y) {
  std::string out;
  for (std::size_t i = 0; i < y.cols(); ++i) {
    if (i) out += ',';
    out += 'x' + std::to_string(i);
  }
  out += '\n';
  for (std::size_t j = 0; j < y.rows(); ++j) {
    auto r = y.row(j);
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) out += ',';
      out += format_double(r[i]);
    }
    out += '\n';
  }
  return out;
}

Matrix dataset_from_csv(std::string_view text) {
  std::size_t line_no = 0;
  std::size_t d = 0;
  bool header = true;
  std::vector<double> values;
  std::size_t rows = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    std::size_t fields = 0;
    if (header) {
      std::size_t pos = 0;
      while (true) {
        const auto comma = line.find(',', pos);
        const std::string_view name = trim(line.substr(pos, comma - pos));
        if (name != "x" + std::to_string(fields))
          fail(ErrorKind::InvalidArgument, "header field " + std::to_string(fields) + " should be x" +
                                               std::to_string(fields));
        ++fields;
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
      }
      d = fields;
      header = false;
      continue;
    }
    std::size_t pos = 0;
    while (true) {
      const auto comma = line.find(',', pos);
      values.push_back(parse_double(line.substr(pos, comma - pos), line_no));
      ++fields;
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    if (fields != d)
      fail(ErrorKind::InvalidArgument, "line " + std::to_string(line_no) + ": expected " + std::to_string(d) +
                                           " fields, got " + std::to_string(fields));
    ++rows;
  }
  if (header) fail(ErrorKind::InvalidArgument, "dataset has no header");
  Matrix y(rows, d);
  std::copy(values.begin(), values.end(), y.values().begin());
  return y;
}

Matrix read_dataset(const std::string& path) {
  const std::string text = read_text(path);
  return with_path(path, [&] { return dataset_from_csv(text); });
}

void write_dataset(const Matrix& y, const std::string& path) { write_text(path, dataset_to_csv(y)); }

std::string labels_to_text(const LabelVector& z) {
  std::string out;
  for (int v : z.values) {
    out += std::to_string(v);
    out += '\n';
  }
  return out;
}

LabelVector labels_from_text(std::string_view text) {
  LabelVector z;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty()) continue;
    int v = 0;
    const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
    if (ec != std::errc() || ptr != line.data() + line.size() || v < 0)
      fail(ErrorKind::InvalidArgument, "line " + std::to_string(line_no) + ": bad label '" + std::string(line) + "'");
    z.values.push_back(v);
  }
  return z;
}

LabelVector read_labels(const std::string& path) {
  const std::string text = read_text(path);
  return with_path(path, [&] { return labels_from_text(text); });
}

void write_labels(const LabelVector& z, const std::string& path) { write_text(path, labels_to_text(z)); }

ExperimentConfig config_from_json(std::string_view text) {
  try {
    const json j = json::parse(text);
    if (!j.is_object()) fail(ErrorKind::InvalidArgument, "config must be a JSON object");
    ExperimentConfig c;
    if (j.contains("model_kind")) c.model_kind = parse_model_kind(j.at("model_kind").get<std::string>());
    get_if_present(j, "params_file", c.params_file);
    if (j.contains("params")) c.params = params_from_json(j.at("params").dump());
    get_if_present(j, "n", c.n);
    get_if_present(j, "replications", c.replications);
    if (j.contains("methods")) {
      for (const auto& m : j.at("methods")) c.methods.push_back(parse_method(m.get<std::string>()));
    }
    get_if_present(j, "max_iters", c.max_iters);
    get_if_present(j, "base_seed", c.base_seed);
    get_if_present(j, "ridge", c.ridge);
    get_if_present(j, "workers", c.workers);
    if (j.contains("time_budget_seconds") && !j.at("time_budget_seconds").is_null())
      c.time_budget_seconds = j.at("time_budget_seconds").get<double>();
    get_if_present(j, "covariance_scale", c.covariance_scale);
    get_if_present(j, "lloyd_restarts", c.lloyd.restarts);
    get_if_present(j, "lloyd_max_iters", c.lloyd.max_iters);
    return c;
  } catch (const json::exception& e) {
    fail(ErrorKind::InvalidArgument, std::string("malformed config: ") + e.what());
  }
}

namespace {

json config_json(const ExperimentConfig& c) {
  json j;
  j["model_kind"] = std::string(to_string(c.model_kind));
  if (!c.params_file.empty()) j["params_file"] = c.params_file;
  if (c.params) j["params"] = json::parse(params_to_json(*c.params));
  j["n"] = c.n;
  j["replications"] = c.replications;
  json methods = json::array();
  for (Method m : c.methods) methods.push_back(std::string(to_string(m)));
  j["methods"] = methods;
  j["max_iters"] = c.max_iters;
  j["base_seed"] = c.base_seed;
  j["ridge"] = c.ridge;
  j["workers"] = c.workers;
  if (c.time_budget_seconds) j["time_budget_seconds"] = *c.time_budget_seconds;
  j["covariance_scale"] = c.covariance_scale;
  j["lloyd_restarts"] = c.lloyd.restarts;
  j["lloyd_max_iters"] = c.lloyd.max_iters;
  return j;
}

}  // namespace

std::string config_to_json(const ExperimentConfig& config) { return config_json(config).dump(2) + "\n"; }

ExperimentConfig read_config(const std::string& path) {
  const std::string text = read_text(path);
  return with_path(path, [&] { return config_from_json(text); });
}

std::string experiment_report_json(const CurveTable& table) {
  json j;
  j["config"] = config_json(table.config);
  j["parameter_draws"] =
      table.config.model_kind == ModelKind::Custom ? "fixed" : "redrawn per replication";
  j["log_base"] = "natural";
  j["truncated"] = table.truncated;
  j["wall_seconds"] = table.wall_seconds;
  json reps = json::array();
  for (const auto& r : table.replications) {
    json e;
    e["index"] = r.index;
    e["params_seed"] = r.params_seed;
    e["data_seed"] = r.data_seed;
    e["vanilla_seed"] = r.vanilla_seed;
    e["spectral_seed"] = r.spectral_seed;
    e["snr"] = r.snr;
    e["exponent"] = r.exponent;
    json finals = json::object();
    for (std::size_t m = 0; m < table.config.methods.size(); ++m)
      finals[std::string(to_string(table.config.methods[m]))] = r.h[m].back();
    e["final_h"] = finals;
    e["regularization_events"] = r.regularization_events;
    e["empty_cluster_events"] = r.empty_cluster_events;
    reps.push_back(e);
  }
  j["replications"] = reps;
  return j.dump(2) + "\n";
}

}  // namespace agmm
