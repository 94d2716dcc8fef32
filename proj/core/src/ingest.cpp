#include "tmpredict/ingest.hpp"

#include <glob.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "tmpredict/config_file.hpp"
#include "tmpredict/error.hpp"
#include "tmpredict/text_io.hpp"

namespace tmpredict {

namespace fs = std::filesystem;

DatasetFormat parse_format(const std::string& name) {
  if (name == "csv-long") return DatasetFormat::CsvLong;
  if (name == "csv-wide") return DatasetFormat::CsvWide;
  if (name == "xml-tm") return DatasetFormat::XmlTm;
  throw Error(ErrorCode::BadManifest, "unknown format '" + name + "'");
}

std::string to_string(DatasetFormat format) {
  switch (format) {
    case DatasetFormat::CsvLong: return "csv-long";
    case DatasetFormat::CsvWide: return "csv-wide";
    case DatasetFormat::XmlTm: return "xml-tm";
  }
  return "csv-long";
}

void DatasetManifest::validate() const {
  if (paths.empty()) throw Error(ErrorCode::BadManifest, "no input paths");
  if (interval_seconds <= 0) throw Error(ErrorCode::BadManifest, "interval_seconds must be > 0");
  if (node_count && *node_count == 0) throw Error(ErrorCode::BadManifest, "node_count must be > 0");
  if (format == DatasetFormat::XmlTm && !node_count) {
    throw Error(ErrorCode::BadManifest, "xml-tm requires node_count");
  }
}

namespace {

std::vector<fs::path> expand_glob(const fs::path& pattern) {
  glob_t matches{};
  std::vector<fs::path> out;
  if (::glob(pattern.c_str(), 0, nullptr, &matches) == 0) {
    for (std::size_t k = 0; k < matches.gl_pathc; ++k) out.emplace_back(matches.gl_pathv[k]);
  }
  ::globfree(&matches);
  // glob(3) sorts lexicographically; a pattern without matches stays
  // literal so the missing path is reported by name later.
  if (out.empty()) out.push_back(pattern);
  return out;
}

}  // namespace

DatasetManifest read_manifest(const fs::path& path) {
  const KeyValueFile kv = KeyValueFile::load(path);
  DatasetManifest m;
  m.format = parse_format(kv.get_or("format", "csv-long"));
  const fs::path base = path.parent_path();
  for (const auto& item : kv.get_list("paths")) {
    fs::path p(item);
    if (p.is_relative()) p = base / p;
    for (auto& expanded : expand_glob(p)) m.paths.push_back(std::move(expanded));
  }
  if (auto v = kv.get_int("interval_seconds")) m.interval_seconds = *v;
  if (auto v = kv.get_int("node_count")) {
    if (*v <= 0) throw Error(ErrorCode::BadManifest, "node_count must be > 0");
    m.node_count = static_cast<std::size_t>(*v);
  }
  m.unit = kv.get_or("unit", m.unit);
  if (auto v = kv.get_int("start_index")) {
    if (*v < 0) throw Error(ErrorCode::BadManifest, "start_index must be >= 0");
    m.start_index = static_cast<std::size_t>(*v);
  }
  if (auto v = kv.get_int("count")) {
    if (*v <= 0) throw Error(ErrorCode::BadManifest, "count must be > 0");
    m.count = static_cast<std::size_t>(*v);
  }
  if (auto v = kv.get_int("start_timestamp")) m.start_timestamp = *v;
  m.validate();
  return m;
}

std::size_t NodeIdMap::index_of(const std::string& id) {
  if (const auto it = index_.find(id); it != index_.end()) return it->second;
  if (ids_.size() >= capacity_) {
    throw Error(ErrorCode::UnknownNodeId,
                "node id '" + id + "' exceeds declared node_count " + std::to_string(capacity_));
  }
  index_.emplace(id, ids_.size());
  ids_.push_back(id);
  return ids_.size() - 1;
}

TrafficSeries assemble_series(std::vector<TrafficMatrix> matrices, const DatasetManifest& manifest,
                              IngestReport& report) {
  if (matrices.empty()) throw Error(ErrorCode::EmptyInput, "no traffic matrices");
  std::stable_sort(matrices.begin(), matrices.end(),
                   [](const auto& a, const auto& b) { return a.timestamp() < b.timestamp(); });
  const std::int64_t step = manifest.interval_seconds;
  std::vector<TrafficMatrix> out;
  out.reserve(matrices.size() + 8);
  for (auto& m : matrices) {
    if (m.n() != matrices.front().n()) {
      throw Error(ErrorCode::MixedN, "node count " + std::to_string(m.n()) + " differs from " +
                                         std::to_string(matrices.front().n()));
    }
    if (!out.empty()) {
      const std::int64_t gap = m.timestamp() - out.back().timestamp();
      if (gap <= 0) {
        throw Error(ErrorCode::NonMonotonicTimestamps,
                    "duplicate timestamp " + std::to_string(m.timestamp()));
      }
      if (gap % step != 0) {
        throw Error(ErrorCode::NonUniformSeries, "gap of " + std::to_string(gap) +
                                                     "s is not a multiple of " +
                                                     std::to_string(step) + "s");
      }
      const std::int64_t missing = gap / step - 1;
      if (missing >= 2) {
        throw Error(ErrorCode::GapTooLarge, std::to_string(missing) + " consecutive slots missing before " +
                                                std::to_string(m.timestamp()));
      }
      if (missing == 1) {
        out.push_back(out.back().with_timestamp(out.back().timestamp() + step));
        ++report.gaps_filled;
      }
    }
    out.push_back(std::move(m));
  }

  const std::size_t begin = std::min(manifest.start_index, out.size());
  const std::size_t count = manifest.count.value_or(out.size() - begin);
  if (begin + count > out.size()) {
    throw Error(ErrorCode::BadManifest, "requested range [" + std::to_string(begin) + ", " +
                                            std::to_string(begin + count) + ") exceeds " +
                                            std::to_string(out.size()) + " loaded slots");
  }
  if (count == 0) throw Error(ErrorCode::EmptyInput, "selected range is empty");
  std::vector<TrafficMatrix> selected(out.begin() + static_cast<std::ptrdiff_t>(begin),
                                      out.begin() + static_cast<std::ptrdiff_t>(begin + count));
  report.matrices_loaded = selected.size();
  report.inferred_n = selected.front().n();
  return TrafficSeries(std::move(selected), step, manifest.unit);
}

namespace {

void reject(IngestReport& report, std::size_t line_no, const std::string& why) {
  ++report.rows_rejected;
  report.rejection_reasons.push_back("line " + std::to_string(line_no) + ": " + why);
}

struct LongRow {
  std::int64_t timestamp;
  std::size_t src;
  std::size_t dst;
  double volume;
};

std::vector<TrafficMatrix> read_csv_long(std::istream& in, const DatasetManifest& manifest,
                                         IngestReport& report) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::EmptyInput, "csv-long input is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "timestamp,src,dst,volume") {
    throw Error(ErrorCode::HeaderMismatch, "expected 'timestamp,src,dst,volume', got '" + line + "'");
  }

  std::vector<LongRow> rows;
  std::size_t line_no = 1;
  std::size_t max_index = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != 4) {
      reject(report, line_no, "expected 4 fields");
      continue;
    }
    const auto ts = parse_int(fields[0]);
    const auto src = parse_int(fields[1]);
    const auto dst = parse_int(fields[2]);
    const auto vol = parse_double(fields[3]);
    if (!ts || !src || !dst || !vol || *src < 0 || *dst < 0) {
      reject(report, line_no, "unparsable field");
      continue;
    }
    if (!std::isfinite(*vol) || *vol < 0.0) {
      reject(report, line_no, "volume must be finite and non-negative");
      continue;
    }
    const auto s = static_cast<std::size_t>(*src);
    const auto d = static_cast<std::size_t>(*dst);
    if (manifest.node_count && (s >= *manifest.node_count || d >= *manifest.node_count)) {
      throw Error(ErrorCode::InconsistentN, "line " + std::to_string(line_no) + ": index " +
                                                std::to_string(std::max(s, d)) + " >= node_count " +
                                                std::to_string(*manifest.node_count));
    }
    max_index = std::max({max_index, s, d});
    rows.push_back({*ts, s, d, *vol});
  }
  if (rows.empty()) throw Error(ErrorCode::EmptyInput, "csv-long input has no data rows");

  const std::size_t n = manifest.node_count.value_or(max_index + 1);
  std::map<std::int64_t, std::vector<double>> by_time;
  std::map<std::int64_t, std::vector<bool>> seen;
  for (const auto& r : rows) {
    auto& entries = by_time[r.timestamp];
    auto& flags = seen[r.timestamp];
    if (entries.empty()) {
      entries.assign(n * n, 0.0);
      flags.assign(n * n, false);
    }
    const std::size_t k = r.src * n + r.dst;
    if (flags[k]) {
      ++report.rows_rejected;
      report.rejection_reasons.push_back("duplicate (timestamp,src,dst) " +
                                         std::to_string(r.timestamp) + "," +
                                         std::to_string(r.src) + "," + std::to_string(r.dst));
      continue;
    }
    flags[k] = true;
    entries[k] = r.volume;
  }

  std::vector<TrafficMatrix> matrices;
  matrices.reserve(by_time.size());
  for (auto& [ts, entries] : by_time) {
    const auto& flags = seen[ts];
    report.entries_defaulted += static_cast<std::size_t>(std::count(flags.begin(), flags.end(), false));
    matrices.emplace_back(n, std::move(entries), ts);
  }
  return matrices;
}

std::size_t exact_sqrt(std::size_t k) {
  auto r = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(k))));
  while (r * r > k) --r;
  while ((r + 1) * (r + 1) <= k) ++r;
  return r;
}

std::vector<TrafficMatrix> read_csv_wide(std::istream& in, const DatasetManifest& manifest,
                                         IngestReport& report) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::EmptyInput, "csv-wide input is empty");
  const auto header = split_csv_line(line);
  if (header.empty() || header[0] != "timestamp") {
    throw Error(ErrorCode::HeaderMismatch, "first column must be 'timestamp'");
  }
  const std::size_t width = header.size() - 1;
  for (std::size_t k = 0; k < width; ++k) {
    if (header[k + 1] != "od_" + std::to_string(k)) {
      throw Error(ErrorCode::HeaderMismatch, "column " + std::to_string(k + 1) + " must be od_" +
                                                 std::to_string(k));
    }
  }
  const std::size_t n = exact_sqrt(width);
  if (width == 0 || n * n != width) {
    throw Error(ErrorCode::WidthNotSquare, std::to_string(width) + " OD columns is not a square");
  }
  if (manifest.node_count && *manifest.node_count != n) {
    throw Error(ErrorCode::WidthNotSquare,
                std::to_string(width) + " OD columns does not match node_count " +
                    std::to_string(*manifest.node_count));
  }

  std::vector<TrafficMatrix> matrices;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != width + 1) {
      reject(report, line_no, "expected " + std::to_string(width + 1) + " fields");
      continue;
    }
    const auto ts = parse_int(fields[0]);
    if (!ts) {
      reject(report, line_no, "unparsable timestamp");
      continue;
    }
    if (!matrices.empty() && *ts <= matrices.back().timestamp()) {
      throw Error(ErrorCode::NonMonotonicTimestamps,
                  "line " + std::to_string(line_no) + ": timestamp " + std::to_string(*ts) +
                      " does not increase");
    }
    std::vector<double> entries(width, 0.0);
    bool bad = false;
    for (std::size_t k = 0; k < width; ++k) {
      const auto v = parse_double(fields[k + 1]);
      if (!v || !std::isfinite(*v) || *v < 0.0) {
        bad = true;
        break;
      }
      entries[k] = *v;
    }
    if (bad) {
      reject(report, line_no, "volume must be finite and non-negative");
      continue;
    }
    matrices.emplace_back(n, std::move(entries), *ts);
  }
  if (matrices.empty()) throw Error(ErrorCode::EmptyInput, "csv-wide input has no data rows");
  return matrices;
}

}  // namespace

LoadedSeries parse_csv_long(std::istream& in, const DatasetManifest& manifest) {
  LoadedSeries out;
  auto matrices = read_csv_long(in, manifest, out.report);
  out.series = assemble_series(std::move(matrices), manifest, out.report);
  return out;
}

LoadedSeries parse_csv_wide(std::istream& in, const DatasetManifest& manifest) {
  LoadedSeries out;
  auto matrices = read_csv_wide(in, manifest, out.report);
  out.series = assemble_series(std::move(matrices), manifest, out.report);
  return out;
}

namespace {

namespace pt = boost::property_tree;

const pt::ptree* find_src_parent(const pt::ptree& node) {
  if (node.count("src") > 0) return &node;
  for (const auto& [name, child] : node) {
    if (name == "<xmlattr>" || name == "<xmlcomment>") continue;
    if (child.count("src") > 0) return &child;
  }
  return nullptr;
}

}  // namespace

TrafficMatrix parse_xml_tm(std::istream& in, const DatasetManifest& manifest, NodeIdMap& ids,
                           IngestReport& report, std::int64_t default_timestamp) {
  if (!manifest.node_count) throw Error(ErrorCode::BadManifest, "xml-tm requires node_count");
  const std::size_t n = *manifest.node_count;
  pt::ptree doc;
  try {
    pt::read_xml(in, doc, pt::xml_parser::trim_whitespace);
  } catch (const pt::xml_parser_error& e) {
    throw Error(ErrorCode::MalformedXml, e.what());
  }
  std::size_t roots = 0;
  const pt::ptree* root = nullptr;
  for (const auto& [name, child] : doc) {
    if (name == "<xmlcomment>") continue;
    ++roots;
    root = &child;
  }
  if (roots != 1 || root == nullptr) {
    throw Error(ErrorCode::MalformedXml, "expected exactly one root element");
  }

  std::int64_t timestamp = default_timestamp;
  if (const auto attr = root->get_optional<std::string>("<xmlattr>.timestamp")) {
    const auto ts = parse_int(*attr);
    if (!ts) throw Error(ErrorCode::MalformedXml, "bad timestamp attribute '" + *attr + "'");
    timestamp = *ts;
  }

  std::vector<double> entries(n * n, 0.0);
  std::vector<bool> filled(n * n, false);
  if (const pt::ptree* parent = find_src_parent(*root)) {
    for (const auto& [name, src] : *parent) {
      if (name != "src") continue;
      const auto src_id = src.get_optional<std::string>("<xmlattr>.id");
      if (!src_id) throw Error(ErrorCode::MalformedXml, "src element without id");
      const std::size_t i = ids.index_of(*src_id);
      for (const auto& [dname, dst] : src) {
        if (dname != "dst") continue;
        const auto dst_id = dst.get_optional<std::string>("<xmlattr>.id");
        if (!dst_id) throw Error(ErrorCode::MalformedXml, "dst element without id");
        const std::size_t j = ids.index_of(*dst_id);
        const auto volume = parse_double(dst.data());
        if (!volume || !std::isfinite(*volume)) {
          throw Error(ErrorCode::MalformedXml, "bad volume '" + dst.data() + "'");
        }
        if (*volume < 0.0) {
          throw Error(ErrorCode::NegativeVolume,
                      "src " + *src_id + " dst " + *dst_id + " volume " + dst.data());
        }
        entries[i * n + j] = *volume;
        filled[i * n + j] = true;
      }
    }
  }
  report.entries_defaulted += static_cast<std::size_t>(std::count(filled.begin(), filled.end(), false));
  report.node_ids = ids.ids();
  return TrafficMatrix(n, std::move(entries), timestamp);
}

void write_xml_tm(std::ostream& out, const TrafficMatrix& m, const std::vector<std::string>& ids) {
  if (ids.size() != m.n()) throw Error(ErrorCode::ShapeMismatch, "need one id per node");
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<TrafficMatrix timestamp=\"" << m.timestamp() << "\">\n";
  for (std::size_t i = 0; i < m.n(); ++i) {
    out << "  <src id=\"" << ids[i] << "\">\n";
    for (std::size_t j = 0; j < m.n(); ++j) {
      out << "    <dst id=\"" << ids[j] << "\">" << format_double(m(i, j)) << "</dst>\n";
    }
    out << "  </src>\n";
  }
  out << "</TrafficMatrix>\n";
}

void write_csv_wide(std::ostream& out, const TrafficSeries& s) {
  const std::size_t n2 = s.n() * s.n();
  out << "timestamp";
  for (std::size_t k = 0; k < n2; ++k) out << ",od_" << k;
  out << '\n';
  for (const auto& m : s.matrices()) {
    out << m.timestamp();
    for (double v : m.entries()) out << ',' << format_double(v);
    out << '\n';
  }
}

void write_csv_long(std::ostream& out, const TrafficSeries& s) {
  out << "timestamp,src,dst,volume\n";
  for (const auto& m : s.matrices()) {
    for (std::size_t i = 0; i < m.n(); ++i) {
      for (std::size_t j = 0; j < m.n(); ++j) {
        out << m.timestamp() << ',' << i << ',' << j << ',' << format_double(m(i, j)) << '\n';
      }
    }
  }
}

namespace {

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, path.string());
  return in;
}

}  // namespace

LoadedSeries load_dataset(const DatasetManifest& manifest) {
  manifest.validate();
  LoadedSeries out;
  std::vector<TrafficMatrix> matrices;

  if (manifest.format == DatasetFormat::XmlTm) {
    NodeIdMap ids(*manifest.node_count);
    for (std::size_t k = 0; k < manifest.paths.size(); ++k) {
      auto in = open_input(manifest.paths[k]);
      const std::int64_t fallback_ts =
          manifest.start_timestamp + static_cast<std::int64_t>(k) * manifest.interval_seconds;
      matrices.push_back(parse_xml_tm(in, manifest, ids, out.report, fallback_ts));
    }
  } else {
    std::optional<std::size_t> n;
    for (const auto& path : manifest.paths) {
      auto in = open_input(path);
      auto part = manifest.format == DatasetFormat::CsvLong ? read_csv_long(in, manifest, out.report)
                                                            : read_csv_wide(in, manifest, out.report);
      if (n && part.front().n() != *n) {
        throw Error(ErrorCode::MixedN, path.string() + " has " + std::to_string(part.front().n()) +
                                           " nodes, expected " + std::to_string(*n));
      }
      n = part.front().n();
      for (auto& m : part) matrices.push_back(std::move(m));
    }
  }
  out.series = assemble_series(std::move(matrices), manifest, out.report);
  return out;
}

}  // namespace tmpredict
