#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace sketchloop {

// Fixed CSV schema shared by simulate and oracle traces:
//   epoch,scope,switch,dimension,metric,value,staleness
// scope is local | global | node; switch is a switch id, a node id for
// scope=node rows, "central", or "-"; dimension is a dimension index,
// "_table" for whole-table metrics, or "-"; staleness is in epochs.
// Doubles print as %.17g so replays are byte-identical.
class TraceWriter {
 public:
  explicit TraceWriter(std::ostream& os);

  void row(uint64_t epoch, std::string_view scope, std::string_view sw,
           std::string_view dimension, std::string_view metric, double value,
           uint64_t staleness);

  uint64_t rows_written() const { return rows_; }

 private:
  std::ostream& os_;
  uint64_t rows_ = 0;
};

struct TraceRow {
  uint64_t epoch = 0;
  std::string scope;
  std::string switch_id;
  std::string dimension;
  std::string metric;
  double value = 0.0;
  uint64_t staleness = 0;
};

std::vector<TraceRow> parse_trace(std::istream& in);
std::vector<TraceRow> load_trace(const std::string& path);

// Metric column name for a quantile point: 0.25 -> "q0.25".
std::string quantile_metric_name(double q);

}  // namespace sketchloop
