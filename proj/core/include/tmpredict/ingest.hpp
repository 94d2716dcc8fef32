#ifndef TMPREDICT_INGEST_HPP
#define TMPREDICT_INGEST_HPP

// Loading traffic-matrix time series from disk.
//
// Three layouts are understood:
//   csv-long  `timestamp,src,dst,volume`, one OD entry per row (canonical).
//   csv-wide  `timestamp,od_0,...,od_{N^2-1}`, one traffic vector per row.
//   xml-tm    one matrix per file: <root><src id=".."><dst id="..">v</dst></src></root>
//
// Every loader funnels through the same series assembly: matrices are sorted
// by timestamp, a single missing slot is repaired by repeating the previous
// matrix, and anything longer is rejected.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tmpredict/traffic.hpp"

namespace tmpredict {

enum class DatasetFormat { CsvLong, CsvWide, XmlTm };

DatasetFormat parse_format(const std::string& name);
std::string to_string(DatasetFormat format);

struct DatasetManifest {
  DatasetFormat format = DatasetFormat::CsvLong;
  std::vector<std::filesystem::path> paths;
  std::int64_t interval_seconds = 900;
  std::optional<std::size_t> node_count;
  std::string unit = "bytes";
  /// Contiguous sub-range of the assembled series.
  std::size_t start_index = 0;
  std::optional<std::size_t> count;
  /// Timestamp of the first xml-tm file when the documents carry none.
  std::int64_t start_timestamp = 0;

  void validate() const;
};

/// Reads a `key = value` manifest. Relative paths and globs resolve against
/// the manifest's own directory.
DatasetManifest read_manifest(const std::filesystem::path& path);

struct IngestReport {
  std::size_t matrices_loaded = 0;
  std::size_t rows_rejected = 0;
  std::vector<std::string> rejection_reasons;
  /// OD entries absent from the input and defaulted to zero.
  std::size_t entries_defaulted = 0;
  /// Missing time slots repaired by repeating the previous matrix.
  std::size_t gaps_filled = 0;
  std::size_t inferred_n = 0;
  /// xml-tm node ids in first-appearance order; position is the matrix index.
  std::vector<std::string> node_ids;
};

struct LoadedSeries {
  TrafficSeries series;
  IngestReport report;
};

/// Maps external node ids to 0-based indices in first-appearance order,
/// shared across all files of one load.
class NodeIdMap {
 public:
  explicit NodeIdMap(std::size_t capacity) : capacity_(capacity) {}

  /// Throws UnknownNodeId once more than `capacity` distinct ids are seen.
  std::size_t index_of(const std::string& id);
  const std::vector<std::string>& ids() const { return ids_; }

 private:
  std::size_t capacity_;
  std::map<std::string, std::size_t> index_;
  std::vector<std::string> ids_;
};

LoadedSeries parse_csv_long(std::istream& in, const DatasetManifest& manifest);
LoadedSeries parse_csv_wide(std::istream& in, const DatasetManifest& manifest);

/// One xml-tm document. The root's optional `timestamp` attribute wins over
/// `default_timestamp`.
TrafficMatrix parse_xml_tm(std::istream& in, const DatasetManifest& manifest, NodeIdMap& ids,
                           IngestReport& report, std::int64_t default_timestamp);

void write_xml_tm(std::ostream& out, const TrafficMatrix& m, const std::vector<std::string>& ids);
void write_csv_wide(std::ostream& out, const TrafficSeries& s);
void write_csv_long(std::ostream& out, const TrafficSeries& s);

/// Sorts by timestamp and repairs single-slot gaps.
TrafficSeries assemble_series(std::vector<TrafficMatrix> matrices,
                              const DatasetManifest& manifest, IngestReport& report);

LoadedSeries load_dataset(const DatasetManifest& manifest);

}  // namespace tmpredict

#endif  // TMPREDICT_INGEST_HPP
