#include "dcot/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>

#include <fmt/format.h>

#include "dcot/error.hpp"

namespace dcot {

namespace {

constexpr char kMagic[4] = {'D', 'C', 'O', 'T'};
constexpr std::uint32_t kVersion = 1;

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

bool parse_double(std::string_view s, double& out) {
  const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

bool parse_index(std::string_view s, Index& out) {
  const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

template <class F>
void for_each_line(const std::string& text, F&& fn) {
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    fn(++line_no, line);
    if (end == text.size()) break;
    pos = end + 1;
  }
}

template <class T>
void put(std::string& out, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  out.append(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <class T>
T get(const std::string& in, std::size_t& offset) {
  if (in.size() - offset < sizeof(T)) throw IoError(fmt::format("dense file truncated at byte {}", offset));
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, in.data() + offset, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
  T v;
  std::memcpy(&v, buf, sizeof(T));
  offset += sizeof(T);
  return v;
}

std::string with_path(const std::filesystem::path& path, const std::string& what) {
  return path.string() + ": " + what;
}

}  // namespace

TensorFormat tensor_format_from_string(const std::string& name) {
  if (name == "coo") return TensorFormat::coo;
  if (name == "dense") return TensorFormat::dense;
  throw ConfigError("unknown tensor format '" + name + "' (expected coo or dense)");
}

std::string to_string(TensorFormat format) { return format == TensorFormat::coo ? "coo" : "dense"; }

ObservationSet parse_coo(const std::string& text) {
  std::optional<ObservationSet> omega;
  for_each_line(text, [&](std::size_t no, std::string_view line) {
    const auto tokens = split_ws(line);
    if (tokens.empty()) return;
    if (tokens.front().starts_with('#')) {
      if (omega) return;
      // "# dims: ..." may be written as "#dims:" too.
      std::string joined(line.substr(line.find('#') + 1));
      const auto colon = joined.find(':');
      if (colon == std::string::npos || split_ws(std::string_view(joined).substr(0, colon)) !=
                                            std::vector<std::string_view>{"dims"})
        return;
      std::vector<Index> dims;
      for (auto tok : split_ws(std::string_view(joined).substr(colon + 1))) {
        Index d = 0;
        if (!parse_index(tok, d) || d == 0) throw IoError(fmt::format("line {}: bad dimension '{}'", no, tok));
        dims.push_back(d);
      }
      if (dims.empty()) throw IoError(fmt::format("line {}: header lists no dimensions", no));
      omega.emplace(Shape(std::move(dims)));
      return;
    }
    if (!omega) throw IoError(fmt::format("line {}: entry before the '# dims:' header", no));
    const Index order = omega->shape().order();
    if (tokens.size() != order + 1)
      throw IoError(fmt::format("line {}: expected {} indices and a value, got {} fields", no, order, tokens.size()));
    std::vector<Index> idx(order);
    for (Index n = 0; n < order; ++n) {
      Index v = 0;
      if (!parse_index(tokens[n], v) || v == 0 || v > omega->shape().dim(n))
        throw IoError(fmt::format("line {}: index '{}' out of range 1..{}", no, tokens[n], omega->shape().dim(n)));
      idx[n] = v - 1;
    }
    double value = 0.0;
    if (!parse_double(tokens[order], value)) throw IoError(fmt::format("line {}: bad value '{}'", no, tokens[order]));
    try {
      omega->add(std::move(idx), value);
    } catch (const Error& e) {
      throw IoError(fmt::format("line {}: {}", no, e.what()));
    }
  });
  if (!omega) throw IoError("missing '# dims:' header");
  return std::move(*omega);
}

std::string format_coo(const ObservationSet& omega) {
  std::vector<Index> order(omega.size());
  for (Index k = 0; k < order.size(); ++k) order[k] = k;
  std::sort(order.begin(), order.end(),
            [&](Index a, Index b) { return omega.entries()[a].index < omega.entries()[b].index; });
  std::string out = "# dims:";
  for (Index d : omega.shape().dims()) out += fmt::format(" {}", d);
  out += '\n';
  for (Index k : order) {
    const auto& e = omega.entries()[k];
    for (Index i : e.index) out += fmt::format("{} ", i + 1);
    out += fmt::format("{}\n", e.value);
  }
  return out;
}

ObservationSet read_coo(const std::filesystem::path& path) {
  try {
    return parse_coo(read_file(path));
  } catch (const IoError& e) {
    if (std::string(e.what()).starts_with(path.string())) throw;
    throw IoError(with_path(path, e.what()));
  }
}

void write_coo(const ObservationSet& omega, const std::filesystem::path& path) { write_file(path, format_coo(omega)); }

DenseTensor parse_dense(const std::string& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) throw IoError("dense file: bad magic at byte 0");
  std::size_t offset = 4;
  const auto version = get<std::uint32_t>(bytes, offset);
  if (version != kVersion) throw IoError(fmt::format("dense file: unsupported version {} at byte 4", version));
  const auto order = get<std::uint32_t>(bytes, offset);
  if (order == 0) throw IoError("dense file: zero order at byte 8");
  std::vector<Index> dims(order);
  for (auto& d : dims) {
    const std::size_t at = offset;
    const auto v = get<std::uint64_t>(bytes, offset);
    if (v == 0) throw IoError(fmt::format("dense file: zero dimension at byte {}", at));
    d = static_cast<Index>(v);
  }
  Shape shape(std::move(dims));
  const std::size_t expected = offset + shape.size() * sizeof(double);
  if (bytes.size() != expected)
    throw IoError(fmt::format("dense file: {} bytes, header implies {}", bytes.size(), expected));
  std::vector<double> data(shape.size());
  for (auto& v : data) v = get<double>(bytes, offset);
  return DenseTensor(std::move(shape), std::move(data));
}

std::string format_dense(const DenseTensor& t) {
  std::string out(kMagic, 4);
  put(out, kVersion);
  put(out, static_cast<std::uint32_t>(t.order()));
  for (Index d : t.shape().dims()) put(out, static_cast<std::uint64_t>(d));
  for (double v : t.values()) put(out, v);
  return out;
}

DenseTensor read_dense(const std::filesystem::path& path) {
  try {
    return parse_dense(read_file(path));
  } catch (const IoError& e) {
    if (std::string(e.what()).starts_with(path.string())) throw;
    throw IoError(with_path(path, e.what()));
  }
}

void write_dense(const DenseTensor& t, const std::filesystem::path& path) { write_file(path, format_dense(t)); }

void write_dense(const DenseMatrix& m, const std::filesystem::path& path) {
  write_dense(DenseTensor(Shape{m.rows(), m.cols()}, m.values()), path);
}

DenseMatrix read_dense_matrix(const std::filesystem::path& path) {
  DenseTensor t = read_dense(path);
  if (t.order() != 2) throw IoError(with_path(path, "expected a matrix (order 2)"));
  return DenseMatrix(t.shape().dim(0), t.shape().dim(1), t.values());
}

ObservationSet read_observations(const std::filesystem::path& path, TensorFormat format) {
  return format == TensorFormat::coo ? read_coo(path) : ObservationSet::from_dense(read_dense(path));
}

void write_observations(const ObservationSet& omega, const std::filesystem::path& path, TensorFormat format) {
  if (format == TensorFormat::coo) {
    write_coo(omega, path);
    return;
  }
  if (omega.size() != omega.shape().size()) throw IoError(with_path(path, "dense output needs every cell observed"));
  write_dense(omega.to_dense(), path);
}

SubjectPartition parse_partition(const std::string& text) {
  std::size_t pos = 0;
  auto fail = [&](const std::string& what) -> ConfigError {
    return ConfigError(fmt::format("partition, offset {}: {}", pos, what));
  };
  auto skip = [&] {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  };
  auto expect = [&](char c) {
    skip();
    if (pos >= text.size() || text[pos] != c) throw fail(fmt::format("expected '{}'", c));
    ++pos;
  };
  auto number = [&]() -> Index {
    skip();
    const std::size_t start = pos;
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    Index v = 0;
    if (start == pos || !parse_index(std::string_view(text).substr(start, pos - start), v) || v == 0)
      throw fail("expected a positive integer");
    return v - 1;
  };

  SubjectPartition p;
  skip();
  if (pos == text.size()) return p;
  if (text.compare(pos, 4, "mode") != 0) throw fail("expected 'mode='");
  pos += 4;
  expect('=');
  p.mode = number();
  expect(':');
  for (;;) {
    expect('[');
    SliceGroup g;
    g.slices.push_back(number());
    skip();
    while (pos < text.size() && text[pos] == ',') {
      ++pos;
      g.slices.push_back(number());
      skip();
    }
    expect(']');
    skip();
    if (pos < text.size() && text[pos] == '@') {
      ++pos;
      FixedIndex f;
      f.mode = number();
      expect('=');
      f.index = number();
      g.fixed = f;
    }
    p.groups.push_back(std::move(g));
    skip();
    if (pos == text.size()) break;
    expect(',');
  }
  return p;
}

std::string format_partition(const SubjectPartition& partition) {
  if (partition.empty()) return "";
  std::string out = fmt::format("mode={}:", partition.mode + 1);
  for (Index k = 0; k < partition.groups.size(); ++k) {
    const auto& g = partition.groups[k];
    out += k == 0 ? " [" : ", [";
    for (Index i = 0; i < g.slices.size(); ++i) out += fmt::format("{}{}", i == 0 ? "" : ",", g.slices[i] + 1);
    out += ']';
    if (g.fixed) out += fmt::format("@{}={}", g.fixed->mode + 1, g.fixed->index + 1);
  }
  return out;
}

std::vector<std::vector<double>> read_features(const std::filesystem::path& path) {
  std::vector<std::vector<double>> rows;
  const std::string text = read_file(path);
  for_each_line(text, [&](std::size_t no, std::string_view line) {
    const auto tokens = split_ws(line);
    if (tokens.empty() || tokens.front().starts_with('#')) return;
    std::vector<double> row;
    for (auto tok : tokens) {
      double v = 0.0;
      if (!parse_double(tok, v) || !std::isfinite(v))
        throw IoError(with_path(path, fmt::format("line {}: bad number '{}'", no, tok)));
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw IoError(with_path(path, fmt::format("line {}: row length {} differs from {}", no, row.size(),
                                                rows.front().size())));
    rows.push_back(std::move(row));
  });
  if (rows.empty()) throw IoError(with_path(path, "no feature rows"));
  return rows;
}

void write_features(const DenseMatrix& rows, const std::filesystem::path& path) {
  std::string out;
  for (Index i = 0; i < rows.rows(); ++i) {
    for (Index j = 0; j < rows.cols(); ++j) out += fmt::format("{}{}", j == 0 ? "" : " ", rows(i, j));
    out += '\n';
  }
  write_file(path, out);
}

std::vector<int> read_labels(const std::filesystem::path& path) {
  std::vector<int> labels;
  const std::string text = read_file(path);
  for_each_line(text, [&](std::size_t no, std::string_view line) {
    const auto tokens = split_ws(line);
    if (tokens.empty() || tokens.front().starts_with('#')) return;
    int v = 0;
    const auto r = std::from_chars(tokens[0].data(), tokens[0].data() + tokens[0].size(), v);
    if (tokens.size() != 1 || r.ec != std::errc() || r.ptr != tokens[0].data() + tokens[0].size())
      throw IoError(with_path(path, fmt::format("line {}: expected one integer label", no)));
    labels.push_back(v);
  });
  if (labels.empty()) throw IoError(with_path(path, "no labels"));
  return labels;
}

void write_labels(const std::vector<int>& labels, const std::filesystem::path& path) {
  std::string out;
  for (int v : labels) out += fmt::format("{}\n", v);
  write_file(path, out);
}

void write_model(const DcotModel& model, const std::filesystem::path& dir) {
  write_dense(model.core_g, dir / "model_g.dct");
  write_dense(model.core_h, dir / "model_h.dct");
  for (Index n = 0; n < model.factors.size(); ++n)
    write_dense(model.factors[n], dir / fmt::format("factor_{}.dct", n + 1));
}

DcotModel read_model(const std::filesystem::path& dir, Index order) {
  DcotModel m;
  m.core_g = read_dense(dir / "model_g.dct");
  m.core_h = read_dense(dir / "model_h.dct");
  for (Index n = 0; n < order; ++n) m.factors.push_back(read_dense_matrix(dir / fmt::format("factor_{}.dct", n + 1)));
  try {
    m.validate();
  } catch (const Error& e) {
    throw IoError(with_path(dir, e.what()));
  }
  return m;
}

std::string format_trace_csv(const ConvergenceTrace& trace) {
  const Index order = trace.rows.empty() ? 0 : trace.rows.front().factor_steps.size();
  std::string out = "iter,lagrangian,loss,primal_residual,dual_step,z_step";
  for (Index n = 0; n < order; ++n) out += fmt::format(",factor_step_{}", n + 1);
  out += ",g_step,h_step,z_inner_iters,z_grad_norm\n";
  for (const auto& r : trace.rows) {
    out += fmt::format("{},{},{},{},{},{}", r.iter, r.lagrangian, r.loss, r.primal_residual, r.dual_step, r.z_step);
    for (double s : r.factor_steps) out += fmt::format(",{}", s);
    out += fmt::format(",{},{},{},{}\n", r.g_step, r.h_step, r.z_inner_iters, r.z_grad_norm);
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(with_path(path, "cannot open for reading"));
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError(with_path(path, "read failed"));
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(with_path(path, "cannot open for writing"));
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  out.flush();
  if (!out) throw IoError(with_path(path, "write failed"));
}

}  // namespace dcot
