// Flat text formats for classifiers and encoders.
//
//   goat-classifier 1
//   architecture mlp 32        (or: architecture linear 0)
//   shape <input_dim> <class_count>
//   W0 <rows> <cols>
//   <row-major values, one row per line>
//   b0 <cols>
//   <values>
//   ...
//   end
#include <charconv>
#include <cstdio>
#include <sstream>

#include "goat/encoder.hpp"
#include "goat/model.hpp"

namespace goat {
namespace {

void put(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

void put_row(std::string& out, const double* v, Eigen::Index n) {
  for (Eigen::Index k = 0; k < n; ++k) {
    if (k) out += ' ';
    put(out, v[k]);
  }
  out += '\n';
}

class Reader {
 public:
  explicit Reader(std::string_view text) : in_(std::string(text)) {}

  std::string word() {
    std::string w;
    if (!(in_ >> w)) throw IoError("unexpected end of model text");
    return w;
  }

  void expect(std::string_view w) {
    const std::string got = word();
    if (got != w) {
      throw IoError("expected '" + std::string(w) + "' in model text, found '" + got + "'");
    }
  }

  long integer() {
    const std::string w = word();
    long v = 0;
    const auto [ptr, ec] = std::from_chars(w.data(), w.data() + w.size(), v);
    if (ec != std::errc{} || ptr != w.data() + w.size()) {
      throw IoError("expected an integer in model text, found '" + w + "'");
    }
    return v;
  }

  double real() {
    const std::string w = word();
    char* end = nullptr;
    const double v = std::strtod(w.c_str(), &end);
    if (end != w.c_str() + w.size()) {
      throw IoError("expected a number in model text, found '" + w + "'");
    }
    return v;
  }

 private:
  std::istringstream in_;
};

void write_classifier(std::string& out, const Classifier& h) {
  out += "goat-classifier 1\n";
  out += h.architecture() == Architecture::linear ? "architecture linear 0\n"
                                                  : "architecture mlp " +
                                                        std::to_string(h.spec().hidden_width) +
                                                        "\n";
  out += "shape " + std::to_string(h.input_dim()) + " " + std::to_string(h.class_count()) + "\n";
  for (int l = 0; l < h.layer_count(); ++l) {
    const auto w = h.weight(l);
    const auto b = h.bias(l);
    out += "W" + std::to_string(l) + " " + std::to_string(w.rows()) + " " +
           std::to_string(w.cols()) + "\n";
    for (Eigen::Index r = 0; r < w.rows(); ++r) put_row(out, w.row(r).data(), w.cols());
    out += "b" + std::to_string(l) + " " + std::to_string(b.size()) + "\n";
    put_row(out, b.data(), b.size());
  }
  out += "end\n";
}

Classifier read_classifier(Reader& in) {
  in.expect("goat-classifier");
  const long version = in.integer();
  if (version != 1) throw IoError("unsupported classifier format version " + std::to_string(version));
  in.expect("architecture");
  const std::string arch = in.word();
  ModelSpec spec;
  if (arch == "linear") {
    spec.architecture = Architecture::linear;
  } else if (arch == "mlp") {
    spec.architecture = Architecture::mlp;
  } else {
    throw IoError("unknown architecture '" + arch + "'");
  }
  spec.hidden_width = static_cast<int>(in.integer());
  in.expect("shape");
  const int input_dim = static_cast<int>(in.integer());
  const int class_count = static_cast<int>(in.integer());
  const int layers = spec.architecture == Architecture::linear ? 1 : 2;
  std::vector<double> params;
  for (int l = 0; l < layers; ++l) {
    in.expect("W" + std::to_string(l));
    const long rows = in.integer();
    const long cols = in.integer();
    if (rows < 0 || cols < 0) throw IoError("negative block size");
    for (long k = 0; k < rows * cols; ++k) params.push_back(in.real());
    in.expect("b" + std::to_string(l));
    const long n = in.integer();
    if (n < 0) throw IoError("negative block size");
    for (long k = 0; k < n; ++k) params.push_back(in.real());
  }
  in.expect("end");
  try {
    return Classifier(spec, input_dim, class_count, std::move(params));
  } catch (const ValidationError& e) {
    throw IoError(std::string("inconsistent classifier blocks: ") + e.what());
  }
}

}  // namespace

std::string serialize(const Classifier& h) {
  std::string out;
  write_classifier(out, h);
  return out;
}

Classifier deserialize_classifier(std::string_view text) {
  Reader in(text);
  return read_classifier(in);
}

std::string serialize(const Encoder& e) {
  std::string out = "goat-encoder 1\nmode ";
  out += to_string(e.mode());
  out += '\n';
  if (e.mode() == EncoderMode::standardize) {
    out += "mean " + std::to_string(e.mean().size()) + "\n";
    put_row(out, e.mean().data(), e.mean().size());
    out += "scale " + std::to_string(e.scale().size()) + "\n";
    put_row(out, e.scale().data(), e.scale().size());
  } else if (e.mode() == EncoderMode::hidden) {
    write_classifier(out, e.network());
  }
  out += "end\n";
  return out;
}

Encoder deserialize_encoder(std::string_view text) {
  Reader in(text);
  in.expect("goat-encoder");
  const long version = in.integer();
  if (version != 1) throw IoError("unsupported encoder format version " + std::to_string(version));
  in.expect("mode");
  const EncoderMode mode = parse_encoder_mode(in.word());
  Encoder e = Encoder::identity();
  if (mode == EncoderMode::standardize) {
    auto block = [&](std::string_view name) {
      in.expect(name);
      const long n = in.integer();
      if (n < 1) throw IoError("empty encoder block");
      Vector v(n);
      for (long k = 0; k < n; ++k) v[k] = in.real();
      return v;
    };
    Vector mean = block("mean");
    Vector scale = block("scale");
    e = Encoder::standardize(std::move(mean), std::move(scale));
  } else if (mode == EncoderMode::hidden) {
    e = Encoder::hidden(read_classifier(in));
  }
  in.expect("end");
  return e;
}

}  // namespace goat
