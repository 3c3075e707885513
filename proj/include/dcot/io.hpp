#pragma once

// File formats.
//
// COO text: a header line "# dims: I_1 ... I_N", then one entry per line,
// "i_1 ... i_N value", with 1-based indices. Other lines starting with '#'
// and blank lines are ignored.
//
// Dense binary: "DCOT", u32 version (1), u32 N, N x u64 dims, then the
// values as little-endian f64 in flat (first-mode-fastest) order.
//
// Partition text, 1-based:
//   mode=1: [1,2]@2=1, [1,2]@2=2, [3]
// groups tie the listed core slices along `mode`; "@m=k" restricts a group
// to the cells whose coordinate along mode m equals k.

#include <filesystem>
#include <string>
#include <vector>

#include "dcot/model.hpp"
#include "dcot/observations.hpp"
#include "dcot/solver.hpp"
#include "dcot/tensor.hpp"

namespace dcot {

enum class TensorFormat { coo, dense };

TensorFormat tensor_format_from_string(const std::string& name);
std::string to_string(TensorFormat format);

ObservationSet parse_coo(const std::string& text);
std::string format_coo(const ObservationSet& omega);
ObservationSet read_coo(const std::filesystem::path& path);
void write_coo(const ObservationSet& omega, const std::filesystem::path& path);

DenseTensor parse_dense(const std::string& bytes);
std::string format_dense(const DenseTensor& t);
DenseTensor read_dense(const std::filesystem::path& path);
void write_dense(const DenseTensor& t, const std::filesystem::path& path);
void write_dense(const DenseMatrix& m, const std::filesystem::path& path);
DenseMatrix read_dense_matrix(const std::filesystem::path& path);

/// Either format, as an observation set (a dense file observes every cell).
ObservationSet read_observations(const std::filesystem::path& path, TensorFormat format);
void write_observations(const ObservationSet& omega, const std::filesystem::path& path, TensorFormat format);

SubjectPartition parse_partition(const std::string& text);
std::string format_partition(const SubjectPartition& partition);

/// One row of whitespace-separated numbers per index.
std::vector<std::vector<double>> read_features(const std::filesystem::path& path);
void write_features(const DenseMatrix& rows, const std::filesystem::path& path);
/// One integer label per line.
std::vector<int> read_labels(const std::filesystem::path& path);
void write_labels(const std::vector<int>& labels, const std::filesystem::path& path);

/// Model files in a directory: model_g.dct, model_h.dct, factor_<n>.dct (1-based).
void write_model(const DcotModel& model, const std::filesystem::path& dir);
DcotModel read_model(const std::filesystem::path& dir, Index order);

/// Trace rows as CSV (wall time is left out so equal runs give equal bytes).
std::string format_trace_csv(const ConvergenceTrace& trace);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace dcot
