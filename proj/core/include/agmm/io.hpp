#pragma once

// File formats: params and experiment configs as JSON, datasets as CSV with
// an x0..x{d-1} header, labels as one 0-based integer per line. Failures to
// open, read or write throw ErrorKind::Io naming the path; malformed
// content throws InvalidArgument (or InvalidParams for parameter files).

#include <string>
#include <string_view>

#include "agmm/bench.hpp"
#include "agmm/model.hpp"

namespace agmm {

std::string read_text(const std::string& path);
void write_text(const std::string& path, std::string_view content);

std::string params_to_json(const GmmParams& params);
GmmParams params_from_json(std::string_view text);
GmmParams read_params(const std::string& path);
void write_params(const GmmParams& params, const std::string& path);

std::string dataset_to_csv(const Matrix& y);
Matrix dataset_from_csv(std::string_view text);
Matrix read_dataset(const std::string& path);
void write_dataset(const Matrix& y, const std::string& path);

std::string labels_to_text(const LabelVector& z);
LabelVector labels_from_text(std::string_view text);
LabelVector read_labels(const std::string& path);
void write_labels(const LabelVector& z, const std::string& path);

// Field names mirror ExperimentConfig; missing fields keep their defaults.
ExperimentConfig config_from_json(std::string_view text);
std::string config_to_json(const ExperimentConfig& config);
ExperimentConfig read_config(const std::string& path);

// Config echo, per-replication seeds and SNR summary, wall time.
std::string experiment_report_json(const CurveTable& table);

// Locale-independent shortest round-trip formatting ("nan", "inf", "-inf" for
// non-finite values).
std::string format_double(double v);

}  // namespace agmm
