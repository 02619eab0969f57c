#include "goat/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <numeric>
#include <sstream>

namespace goat {

namespace {

std::optional<std::vector<int>> copy_labels(const WeightedDataset& data) {
  if (!data.has_labels()) return std::nullopt;
  return data.evaluation_labels();
}

}  // namespace

WeightedDataset two_moons(std::size_t n, double noise_sigma, std::uint64_t seed) {
  if (n < 2 || n % 2 != 0) throw ValidationError("two_moons needs an even n >= 2");
  if (!(noise_sigma >= 0.0)) throw ValidationError("noise_sigma must be nonnegative");
  Rng rng(seed);
  const std::size_t half = n / 2;
  Matrix pts(static_cast<Eigen::Index>(n), 2);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double theta = std::numbers::pi * rng.uniform();
    const auto r = static_cast<Eigen::Index>(i);
    if (i < half) {
      pts(r, 0) = std::cos(theta) - 0.5;
      pts(r, 1) = std::sin(theta) - 0.25;
      labels[i] = 0;
    } else {
      pts(r, 0) = 0.5 - std::cos(theta);
      pts(r, 1) = 0.25 - std::sin(theta);
      labels[i] = 1;
    }
  }
  if (noise_sigma > 0.0) {
    for (Eigen::Index k = 0; k < pts.size(); ++k) pts.data()[k] += noise_sigma * rng.normal();
  }
  return WeightedDataset::uniform(std::move(pts), std::move(labels));
}

WeightedDataset two_gaussians(std::size_t n, double sigma, std::uint64_t seed) {
  if (n < 2 || n % 2 != 0) throw ValidationError("two_gaussians needs an even n >= 2");
  if (!(sigma >= 0.0)) throw ValidationError("sigma must be nonnegative");
  Rng rng(seed);
  Matrix pts(static_cast<Eigen::Index>(n), 2);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = i < n / 2 ? 0 : 1;
    const auto r = static_cast<Eigen::Index>(i);
    pts(r, 0) = (y == 0 ? -1.0 : 1.0) + sigma * rng.normal();
    pts(r, 1) = sigma * rng.normal();
    labels[i] = y;
  }
  return WeightedDataset::uniform(std::move(pts), std::move(labels));
}

WeightedDataset rotate(const WeightedDataset& data, double angle_degrees) {
  if (data.dim() != 2) throw ValidationError("rotate needs 2-D data");
  const double a = angle_degrees * std::numbers::pi / 180.0;
  const double c = std::cos(a), s = std::sin(a);
  Matrix out(data.points().rows(), 2);
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const double x = data.points()(i, 0), y = data.points()(i, 1);
    out(i, 0) = c * x - s * y;
    out(i, 1) = s * x + c * y;
  }
  return WeightedDataset(std::move(out), data.weights(), copy_labels(data));
}

WeightedDataset feature_shift(const WeightedDataset& data, std::span<const double> offset) {
  if (offset.size() != data.dim()) {
    throw ValidationError("offset has " + std::to_string(offset.size()) + " entries, data has " +
                          std::to_string(data.dim()) + " features");
  }
  Matrix out = data.points();
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    for (Eigen::Index k = 0; k < out.cols(); ++k) out(i, k) += offset[static_cast<std::size_t>(k)];
  }
  return WeightedDataset(std::move(out), data.weights(), copy_labels(data));
}

DomainSequence make_rotation_task(std::size_t n, std::span<const double> angles, double noise,
                                  std::uint64_t seed, bool resample) {
  if (angles.size() < 2) throw ValidationError("rotation task needs at least 2 angles");
  const WeightedDataset base = two_moons(n, noise, seed);
  std::vector<WeightedDataset> domains;
  for (std::size_t k = 0; k < angles.size(); ++k) {
    const WeightedDataset& sample =
        resample && k > 0 ? two_moons(n, noise, mix_seed(seed, k)) : base;
    domains.push_back(rotate(sample, angles[k]));
  }
  return DomainSequence(std::move(domains), {}, !resample);
}

DomainSequence make_shift_task(std::size_t n, std::span<const std::vector<double>> offsets,
                               double sigma, std::uint64_t seed, bool resample) {
  if (offsets.size() < 2) throw ValidationError("shift task needs at least 2 offsets");
  const WeightedDataset base = two_gaussians(n, sigma, seed);
  std::vector<WeightedDataset> domains;
  for (std::size_t k = 0; k < offsets.size(); ++k) {
    const WeightedDataset& sample =
        resample && k > 0 ? two_gaussians(n, sigma, mix_seed(seed, k)) : base;
    domains.push_back(feature_shift(sample, offsets[k]));
  }
  return DomainSequence(std::move(domains), {}, !resample);
}

DomainSequence sort_split(const WeightedDataset& table, std::size_t key_column,
                          std::span<const std::size_t> sizes) {
  if (sizes.empty()) throw ValidationError("sort_split needs at least one size");
  if (key_column >= table.dim()) throw ValidationError("key column out of range");
  const std::size_t total = std::accumulate(sizes.begin(), sizes.end(), std::size_t{0});
  if (total > table.size()) {
    throw ValidationError("sizes sum to " + std::to_string(total) + " but the table has " +
                          std::to_string(table.size()) + " rows");
  }
  std::vector<std::size_t> order(table.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto key = static_cast<Eigen::Index>(key_column);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return table.points()(static_cast<Eigen::Index>(a), key) <
           table.points()(static_cast<Eigen::Index>(b), key);
  });
  std::vector<WeightedDataset> domains;
  std::size_t start = 0;
  for (std::size_t size : sizes) {
    if (size == 0) throw ValidationError("sort_split block sizes must be positive");
    Matrix pts(static_cast<Eigen::Index>(size), table.points().cols());
    std::optional<std::vector<int>> labels;
    if (table.has_labels()) labels.emplace();
    for (std::size_t r = 0; r < size; ++r) {
      const std::size_t row = order[start + r];
      pts.row(static_cast<Eigen::Index>(r)) = table.points().row(static_cast<Eigen::Index>(row));
      if (labels) labels->push_back(table.evaluation_labels()[row]);
    }
    domains.push_back(WeightedDataset::uniform(std::move(pts), std::move(labels)));
    start += size;
  }
  return DomainSequence(std::move(domains));
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string strip(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  std::size_t k = 0;
  while (k < s.size() && s[k] == ' ') ++k;
  return s.substr(k);
}

std::string at_row(const std::string& name, std::size_t line) {
  return name + ": row " + std::to_string(line) + ": ";
}

double parse_real(const std::string& field, const std::string& where) {
  const std::string f = strip(field);
  char* end = nullptr;
  const double v = std::strtod(f.c_str(), &end);
  if (f.empty() || end != f.c_str() + f.size()) {
    throw IoError(where + "'" + f + "' is not a number");
  }
  return v;
}

int parse_label(const std::string& field, const std::string& where) {
  const std::string f = strip(field);
  int v = 0;
  const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
  if (f.empty() || ec != std::errc{} || ptr != f.data() + f.size() || v < 0) {
    throw IoError(where + "label '" + f + "' is not a nonnegative integer");
  }
  return v;
}

}  // namespace

void write_csv(const WeightedDataset& data, std::ostream& out) {
  const std::size_t d = data.dim();
  for (std::size_t k = 0; k < d; ++k) out << (k ? "," : "") << 'x' << k;
  if (data.has_labels()) out << ",y";
  out << ",w\n";
  const std::vector<int>* labels = data.has_labels() ? &data.evaluation_labels() : nullptr;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    for (std::size_t k = 0; k < d; ++k) {
      out << (k ? "," : "") << format_real(data.points()(r, static_cast<Eigen::Index>(k)));
    }
    if (labels) out << ',' << (*labels)[i];
    out << ',' << format_real(data.weights()[r]) << '\n';
  }
}

WeightedDataset read_csv(std::istream& in, const std::string& name) {
  std::string line;
  if (!std::getline(in, line)) throw IoError(name + ": empty file, expected a header");
  const std::vector<std::string> header = split(strip(line));
  std::size_t d = 0;
  while (d < header.size() && strip(header[d]) == "x" + std::to_string(d)) ++d;
  if (d == 0) throw IoError(name + ": row 1: malformed header, expected x0 as the first column");
  bool has_y = false, has_w = false;
  std::size_t col = d;
  if (col < header.size() && strip(header[col]) == "y") {
    has_y = true;
    ++col;
  }
  if (col < header.size() && strip(header[col]) == "w") {
    has_w = true;
    ++col;
  }
  if (col != header.size()) {
    throw IoError(name + ": row 1: malformed header, unexpected column '" + strip(header[col]) +
                  "' (expected x0..x{d-1}, optional y, optional w)");
  }

  std::vector<double> values;
  std::vector<int> labels;
  std::vector<double> weights;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip(line);
    if (line.empty()) continue;
    const std::vector<std::string> fields = split(line);
    const std::string where = at_row(name, line_no);
    if (fields.size() != header.size()) {
      throw IoError(name + ": row " + std::to_string(line_no) + ": expected " +
                    std::to_string(header.size()) + " fields, found " +
                    std::to_string(fields.size()));
    }
    for (std::size_t k = 0; k < d; ++k) values.push_back(parse_real(fields[k], where));
    if (has_y) labels.push_back(parse_label(fields[d], where));
    if (has_w) {
      const double w = parse_real(fields[has_y ? d + 1 : d], where);
      if (!(w >= 0.0) || !std::isfinite(w)) throw IoError(where + "negative or non-finite weight");
      weights.push_back(w);
    }
  }
  const std::size_t n = values.size() / d;
  if (n == 0) throw IoError(name + ": no data rows");
  Matrix pts = Eigen::Map<const Matrix>(values.data(), static_cast<Eigen::Index>(n),
                                        static_cast<Eigen::Index>(d));
  std::optional<std::vector<int>> lab;
  if (has_y) lab = std::move(labels);
  if (!has_w) return WeightedDataset::uniform(std::move(pts), std::move(lab));
  double sum = 0.0;
  for (double w : weights) sum += w;
  if (std::abs(sum - 1.0) > kMassTolerance) {
    try {
      weights = normalize_weights(weights);
    } catch (const ValidationError& e) {
      throw IoError(name + ": " + e.what());
    }
  }
  return WeightedDataset(std::move(pts),
                         Eigen::Map<const Vector>(weights.data(), static_cast<Eigen::Index>(n)),
                         std::move(lab));
}

void write_file_atomic(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    out.flush();
    if (!out) throw IoError("write failed for " + path.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot replace " + path.string() + ": " + ec.message());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void save_csv(const WeightedDataset& data, const std::filesystem::path& path) {
  std::ostringstream os;
  write_csv(data, os);
  write_file_atomic(path, os.str());
}

WeightedDataset load_csv(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  return read_csv(in, path.string());
}

void save_plan_csv(const TransportPlan& plan, const std::filesystem::path& path) {
  std::string text = "i,j,mass\n";
  for (const auto& e : plan.entries()) {
    text += std::to_string(e.source) + "," + std::to_string(e.target) + "," +
            format_real(e.mass) + "\n";
  }
  write_file_atomic(path, text);
}

TransportPlan load_plan_csv(const std::filesystem::path& path, std::size_t source_size,
                            std::size_t target_size) {
  std::istringstream in(read_file(path));
  const std::string name = path.string();
  std::string line;
  if (!std::getline(in, line) || strip(line) != "i,j,mass") {
    throw IoError(name + ": row 1: malformed header, expected i,j,mass");
  }
  std::vector<PlanEntry> entries;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip(line);
    if (line.empty()) continue;
    const auto fields = split(line);
    const std::string where = at_row(name, line_no);
    if (fields.size() != 3) {
      throw IoError(where + "expected 3 fields, found " + std::to_string(fields.size()));
    }
    entries.push_back({parse_label(fields[0], where), parse_label(fields[1], where),
                       parse_real(fields[2], where)});
  }
  try {
    return TransportPlan(source_size, target_size, std::move(entries));
  } catch (const ValidationError& e) {
    throw IoError(name + ": " + e.what());
  }
}

std::filesystem::path save_sequence(const DomainSequence& seq, const std::filesystem::path& dir,
                                    const std::string& stem) {
  std::filesystem::create_directories(dir);
  const int width = seq.size() > 100 ? 3 : 2;
  std::string manifest;
  for (std::size_t t = 0; t < seq.size(); ++t) {
    std::string index = std::to_string(t);
    index.insert(0, static_cast<std::size_t>(std::max(0, width - static_cast<int>(index.size()))),
                 '0');
    const std::string file = stem + "_" + index + ".csv";
    save_csv(seq[t], dir / file);
    manifest += file + "," + to_string(seq.provenance(t)) + "\n";
  }
  const auto path = dir / "manifest.txt";
  write_file_atomic(path, manifest);
  return path;
}

DomainSequence load_sequence(const std::filesystem::path& manifest) {
  std::istringstream in(read_file(manifest));
  const auto base = manifest.parent_path();
  std::vector<WeightedDataset> domains;
  std::vector<Provenance> provenance;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip(line);
    if (line.empty()) continue;
    const auto fields = split(line);
    const std::string where = at_row(manifest.string(), line_no);
    if (fields.size() != 2) throw IoError(where + "expected 2 fields, found " +
                                          std::to_string(fields.size()));
    const std::string tag = strip(fields[1]);
    if (tag == "given") {
      provenance.push_back(Provenance::given);
    } else if (tag == "generated") {
      provenance.push_back(Provenance::generated);
    } else {
      throw IoError(where + "unknown provenance '" + tag + "'");
    }
    domains.push_back(load_csv(base / strip(fields[0])));
  }
  return DomainSequence(std::move(domains), std::move(provenance));
}

}  // namespace goat
