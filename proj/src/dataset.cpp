#include "coda/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "coda/error.hpp"
#include "coda/io.hpp"

namespace coda {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// Splits one record; double quotes may wrap a field and "" escapes a quote.
std::vector<std::string> split_record(std::string_view line, char delim, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"' && trim(cur).empty()) {
      cur.clear();
      quoted = true;
    } else if (c == delim) {
      fields.emplace_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (quoted) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ", column " +
                                           std::to_string(fields.size() + 1) +
                                           ": unterminated quote");
  }
  fields.emplace_back(trim(cur));
  return fields;
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string quote_if_needed(const std::string& field, char delim) {
  if (field.find(delim) == std::string::npos && field.find('"') == std::string::npos &&
      field.find('\n') == std::string::npos) {
    return field;
  }
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void Dataset::validate() const {
  const std::size_t p = feature_names.size();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto& s = samples[i];
    if (s.x.size() != p) {
      throw Error(ErrorCode::DimensionMismatch, "sample " + std::to_string(i) + " has " +
                                                    std::to_string(s.x.size()) + " parts, expected " +
                                                    std::to_string(p));
    }
    if (s.label >= class_names.size()) {
      throw Error(ErrorCode::InvalidArgument, "sample " + std::to_string(i) + " label out of range");
    }
    if (!(s.weight > 0.0)) {
      throw Error(ErrorCode::InvalidArgument, "sample " + std::to_string(i) + " weight must be > 0");
    }
  }
  if (library_sizes && library_sizes->size() != samples.size()) {
    throw Error(ErrorCode::DimensionMismatch, "library sizes not aligned with samples");
  }
  if (!ids.empty() && ids.size() != samples.size()) {
    throw Error(ErrorCode::DimensionMismatch, "ids not aligned with samples");
  }
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
  Dataset out;
  out.feature_names = feature_names;
  out.class_names = class_names;
  out.samples.reserve(indices.size());
  if (library_sizes) out.library_sizes.emplace();
  for (std::size_t i : indices) {
    out.samples.push_back(samples.at(i));
    if (library_sizes) out.library_sizes->push_back((*library_sizes)[i]);
    if (!ids.empty()) out.ids.push_back(ids[i]);
  }
  return out;
}

LibrarySize Dataset::library_size(std::size_t i, LibrarySize fallback) const {
  if (library_sizes) return (*library_sizes)[i];
  return fallback;
}

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());

  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 && line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (!trim(line).empty()) {
      header = split_record(line, options.delimiter, line_no);
      break;
    }
  }
  if (header.empty()) throw Error(ErrorCode::ParseError, "line 1, column 1: missing header");

  std::optional<std::size_t> label_col, id_col, weight_col, provenance_col;
  std::vector<std::size_t> feature_cols;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const auto& name = header[c];
    if (name == options.label_column) {
      label_col = c;
    } else if (options.id_column && name == *options.id_column) {
      id_col = c;
    } else if (name == "weight") {
      weight_col = c;
    } else if (name == "provenance") {
      provenance_col = c;
    } else {
      feature_cols.push_back(c);
    }
  }
  if (!label_col) throw Error(ErrorCode::MissingLabelColumn, "no column named '" + options.label_column + "'");
  if (options.id_column && !id_col) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ", column 1: no id column '" +
                                           *options.id_column + "'");
  }
  if (feature_cols.size() < 2) {
    throw Error(ErrorCode::DimensionTooSmall, "need at least 2 feature columns");
  }

  Dataset ds;
  for (std::size_t c : feature_cols) ds.feature_names.push_back(header[c]);
  std::unordered_map<std::string, std::size_t> class_index;
  std::vector<double> raw;
  std::vector<std::size_t> labels;
  std::vector<double> weights;
  std::vector<Provenance> provenance;

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_record(line, options.delimiter, line_no);
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::RaggedRow, "line " + std::to_string(line_no) + " has " +
                                            std::to_string(fields.size()) + " fields, header has " +
                                            std::to_string(header.size()));
    }
    for (std::size_t c : feature_cols) {
      const auto v = parse_double(fields[c]);
      if (!v) {
        throw Error(ErrorCode::NonNumericFeature, "line " + std::to_string(line_no) + ", column " +
                                                      std::to_string(c + 1) + " ('" + header[c] +
                                                      "'): '" + fields[c] + "'");
      }
      raw.push_back(*v);
    }
    const auto& label = fields[*label_col];
    auto [it, inserted] = class_index.try_emplace(label, ds.class_names.size());
    if (inserted) ds.class_names.push_back(label);
    labels.push_back(it->second);

    if (weight_col) {
      const auto w = parse_double(fields[*weight_col]);
      if (!w || !(*w > 0.0)) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ", column " +
                                               std::to_string(*weight_col + 1) + ": bad weight");
      }
      weights.push_back(*w);
    } else {
      weights.push_back(1.0);
    }
    if (provenance_col) {
      auto prov = Provenance::parse(fields[*provenance_col]);
      if (!prov) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ", column " +
                                               std::to_string(*provenance_col + 1) +
                                               ": bad provenance");
      }
      provenance.push_back(*prov);
    } else {
      provenance.emplace_back();
    }
    if (id_col) ds.ids.push_back(fields[*id_col]);
  }
  if (labels.empty()) throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no + 1) + ", column 1: no data rows");

  NormalizedRows rows;
  try {
    rows = normalize_rows(raw, feature_cols.size(), LibrarySize(options.default_library_size));
  } catch (const Error& e) {
    throw Error(e.code(), std::string(e.what()) + " (data rows are numbered from 0)");
  }
  ds.samples.reserve(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    ds.samples.push_back({std::move(rows.compositions[i]), labels[i], weights[i], provenance[i]});
  }
  ds.library_sizes = std::move(rows.library_sizes);
  return ds;
}

void write_csv(const Dataset& ds, const std::filesystem::path& path, char delimiter) {
  ds.validate();
  std::ostringstream out;
  const std::string d(1, delimiter);
  const bool with_ids = !ds.ids.empty();
  if (with_ids) out << "id" << d;
  for (const auto& name : ds.feature_names) out << quote_if_needed(name, delimiter) << d;
  out << "label" << d << "weight" << d << "provenance\n";
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    const auto& s = ds.samples[i];
    if (with_ids) out << quote_if_needed(ds.ids[i], delimiter) << d;
    for (double v : s.x.parts()) out << format_double(v) << d;
    out << quote_if_needed(ds.class_names[s.label], delimiter) << d << format_double(s.weight) << d
        << s.provenance.tag() << '\n';
  }

  write_file_atomic(path, out.str());
}

void SplitSpec::validate() const {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(ErrorCode::InvalidArgument, "test fraction must lie in (0, 1)");
  }
  if (replicates < 1) throw Error(ErrorCode::InvalidArgument, "replicates must be >= 1");
}

SplitIndices split_indices(const Dataset& ds, const SplitSpec& spec, std::size_t replicate) {
  spec.validate();
  if (ds.size() < 2) throw Error(ErrorCode::EmptyDataset, "need at least 2 samples to split");
  RandomStream rng(spec.seed, "split", replicate);

  std::vector<std::vector<std::size_t>> groups;
  if (spec.stratified) {
    groups.resize(ds.class_names.size());
    for (std::size_t i = 0; i < ds.size(); ++i) groups[ds.samples[i].label].push_back(i);
    for (std::size_t c = 0; c < groups.size(); ++c) {
      if (!groups[c].empty() && groups[c].size() < 2) {
        throw Error(ErrorCode::ClassTooSmall, "class '" + ds.class_names[c] + "' has " +
                                                  std::to_string(groups[c].size()) + " sample(s)");
      }
    }
  } else {
    groups.emplace_back(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) groups[0][i] = i;
  }

  SplitIndices out;
  for (auto& g : groups) {
    if (g.empty()) continue;
    rng.shuffle(std::span<std::size_t>(g));
    const auto n = static_cast<double>(g.size());
    auto n_test = static_cast<std::size_t>(std::llround(n * spec.test_fraction));
    n_test = std::clamp<std::size_t>(n_test, 1, g.size() - 1);
    out.test.insert(out.test.end(), g.begin(), g.begin() + static_cast<std::ptrdiff_t>(n_test));
    out.train.insert(out.train.end(), g.begin() + static_cast<std::ptrdiff_t>(n_test), g.end());
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

std::vector<TrainTest> split(const Dataset& ds, const SplitSpec& spec) {
  spec.validate();
  std::vector<TrainTest> out;
  out.reserve(spec.replicates);
  for (std::size_t r = 0; r < spec.replicates; ++r) {
    const auto idx = split_indices(ds, spec, r);
    out.push_back({ds.subset(idx.train), ds.subset(idx.test)});
  }
  return out;
}

std::vector<double> class_prior(const Dataset& ds) {
  if (ds.samples.empty()) throw Error(ErrorCode::EmptyDataset, "class prior of an empty dataset");
  std::vector<double> prior(ds.class_names.size(), 0.0);
  for (const auto& s : ds.samples) prior.at(s.label) += 1.0;
  for (double& v : prior) v /= static_cast<double>(ds.samples.size());
  return prior;
}

}  // namespace coda
