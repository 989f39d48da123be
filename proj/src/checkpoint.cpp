#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "coda/contrastive.hpp"
#include "coda/error.hpp"
#include "coda/io.hpp"

namespace coda {
namespace {

constexpr const char* kMagic = "coda-encoder-checkpoint";
constexpr int kVersion = 1;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::CheckpointFormat, what); }

void write_layers(std::ostream& out, const char* name, const std::vector<DenseLayer>& layers) {
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const auto& layer = layers[l];
    out << "layer " << name << ' ' << l << ' ' << layer.out() << ' ' << layer.in() << '\n';
    out << 'w';
    for (double v : layer.weight.data) out << ' ' << fmt(v);
    out << "\nb";
    for (double v : layer.bias) out << ' ' << fmt(v);
    out << '\n';
  }
}

// Reads one line and returns a stream over it, requiring the leading keyword.
std::istringstream expect_line(std::istream& in, const std::string& keyword) {
  std::string line;
  if (!std::getline(in, line)) bad("truncated before '" + keyword + "'");
  std::istringstream ls(line);
  std::string word;
  if (!(ls >> word) || word != keyword) bad("expected '" + keyword + "', got '" + word + "'");
  return ls;
}

void expect_end(std::istringstream& ls, const std::string& where) {
  std::string extra;
  if (ls >> extra) bad("trailing data on '" + where + "' line");
}

std::vector<double> read_values(std::istream& in, const std::string& keyword, std::size_t count) {
  auto ls = expect_line(in, keyword);
  std::vector<double> values(count);
  for (std::size_t k = 0; k < count; ++k) {
    std::string token;
    if (!(ls >> token)) bad("too few values on '" + keyword + "' line");
    // strtod rather than stod: subnormal values must load, not throw.
    char* end = nullptr;
    values[k] = std::strtod(token.c_str(), &end);
    if (end != token.c_str() + token.size()) bad("bad number '" + token + "'");
  }
  expect_end(ls, keyword);
  return values;
}

std::vector<DenseLayer> read_layers(std::istream& in, const char* name, std::size_t input,
                                    const std::vector<std::size_t>& hidden, std::size_t output) {
  std::vector<DenseLayer> layers;
  std::size_t width = input;
  for (std::size_t l = 0; l <= hidden.size(); ++l) {
    const std::size_t next = l < hidden.size() ? hidden[l] : output;
    auto ls = expect_line(in, "layer");
    std::string which;
    std::size_t index = 0, out = 0, in_w = 0;
    if (!(ls >> which >> index >> out >> in_w)) bad("malformed layer header");
    expect_end(ls, "layer");
    if (out > (1u << 20) || in_w > (1u << 20)) bad("implausible layer size");
    if (which != name || index != l || out != next || in_w != width) {
      bad(std::string("layer header does not match shape for ") + name + " layer " + std::to_string(l));
    }
    DenseLayer layer{Matrix(out, in_w), {}};
    layer.weight.data = read_values(in, "w", out * in_w);
    layer.bias = read_values(in, "b", out);
    layers.push_back(std::move(layer));
    width = next;
  }
  return layers;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  validate(ckpt.state);
  const auto& s = ckpt.state.shape;
  std::ostringstream out;
  out << kMagic << ' ' << kVersion << '\n';
  out << "input " << input_transform_name(ckpt.state.input) << ' ' << ckpt.state.input_library_size
      << '\n';
  out << "config " << fmt(ckpt.config.temperature) << ' ' << ckpt.config.epochs << ' '
      << ckpt.config.seed << ' ' << strategy_name(ckpt.config.view_strategy) << '\n';
  out << "shape " << s.input << ' ' << s.representation << ' ' << s.projection << ' '
      << s.encoder_hidden.size();
  for (auto h : s.encoder_hidden) out << ' ' << h;
  out << ' ' << s.head_hidden.size();
  for (auto h : s.head_hidden) out << ' ' << h;
  out << '\n';
  write_layers(out, "encoder", ckpt.state.encoder);
  write_layers(out, "head", ckpt.state.head);
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016" PRIx64, parameter_hash(ckpt.state));
  out << "checksum " << hash << '\n';

  write_file_atomic(path, out.str());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());

  Checkpoint ckpt;
  {
    auto ls = expect_line(in, kMagic);
    int version = 0;
    if (!(ls >> version) || version != kVersion) bad("unsupported checkpoint version");
    expect_end(ls, kMagic);
  }
  {
    auto ls = expect_line(in, "input");
    std::string transform;
    std::uint64_t lib = 0;
    if (!(ls >> transform >> lib) || lib == 0) bad("malformed input line");
    if (transform == "clr") {
      ckpt.state.input = InputTransform::Clr;
    } else if (transform == "raw") {
      ckpt.state.input = InputTransform::Raw;
    } else {
      bad("unknown input transform '" + transform + "'");
    }
    ckpt.state.input_library_size = lib;
    expect_end(ls, "input");
  }
  {
    auto ls = expect_line(in, "config");
    std::string tau, strategy;
    if (!(ls >> tau >> ckpt.config.epochs >> ckpt.config.seed >> strategy)) bad("malformed config line");
    try {
      ckpt.config.temperature = std::stod(tau);
    } catch (const std::exception&) {
      bad("bad temperature");
    }
    auto st = parse_strategy(strategy);
    if (!st) bad("unknown view strategy '" + strategy + "'");
    ckpt.config.view_strategy = *st;
    ckpt.config.input = ckpt.state.input;
    ckpt.config.input_library_size = ckpt.state.input_library_size;
    expect_end(ls, "config");
  }
  NetworkShape shape;
  {
    auto ls = expect_line(in, "shape");
    std::size_t n_enc = 0, n_head = 0;
    if (!(ls >> shape.input >> shape.representation >> shape.projection >> n_enc)) bad("malformed shape");
    if (n_enc > 64) bad("implausible layer count");
    shape.encoder_hidden.assign(n_enc, 0);
    for (auto& h : shape.encoder_hidden)
      if (!(ls >> h)) bad("malformed shape");
    if (!(ls >> n_head) || n_head > 64) bad("malformed shape");
    shape.head_hidden.assign(n_head, 0);
    for (auto& h : shape.head_hidden)
      if (!(ls >> h)) bad("malformed shape");
    expect_end(ls, "shape");
  }
  ckpt.state.shape = shape;
  ckpt.state.encoder = read_layers(in, "encoder", shape.input, shape.encoder_hidden, shape.representation);
  ckpt.state.head = read_layers(in, "head", shape.representation, shape.head_hidden, shape.projection);
  {
    auto ls = expect_line(in, "checksum");
    std::string hex;
    if (!(ls >> hex)) bad("missing checksum");
    char expected[32];
    std::snprintf(expected, sizeof(expected), "%016" PRIx64, parameter_hash(ckpt.state));
    if (hex != expected) bad("checksum mismatch");
    expect_end(ls, "checksum");
  }
  std::string rest;
  while (std::getline(in, rest)) {
    if (!rest.empty()) bad("data after checksum");
  }
  try {
    validate(ckpt.state);
  } catch (const Error& e) {
    bad(e.what());
  }
  return ckpt;
}

}  // namespace coda
