#include "sketchloop/trace.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace sketchloop {

namespace {
constexpr char kHeader[] = "epoch,scope,switch,dimension,metric,value,staleness";
}

TraceWriter::TraceWriter(std::ostream& os) : os_(os) { os_ << kHeader << '\n'; }

void TraceWriter::row(uint64_t epoch, std::string_view scope, std::string_view sw,
                      std::string_view dimension, std::string_view metric,
                      double value, uint64_t staleness) {
  char num[40];
  std::snprintf(num, sizeof num, "%.17g", value);
  os_ << epoch << ',' << scope << ',' << sw << ',' << dimension << ',' << metric
      << ',' << num << ',' << staleness << '\n';
  ++rows_;
}

std::vector<TraceRow> parse_trace(std::istream& in) {
  std::vector<TraceRow> rows;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty trace");
  if (line != kHeader) throw std::runtime_error("unexpected trace header: " + line);
  size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 7)
      throw std::runtime_error("trace line " + std::to_string(lineno) +
                               ": expected 7 fields, got " +
                               std::to_string(fields.size()));
    TraceRow r;
    r.epoch = std::stoull(fields[0]);
    r.scope = fields[1];
    r.switch_id = fields[2];
    r.dimension = fields[3];
    r.metric = fields[4];
    r.value = std::stod(fields[5]);
    r.staleness = std::stoull(fields[6]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<TraceRow> load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read trace file: " + path);
  return parse_trace(in);
}

std::string quantile_metric_name(double q) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "q%g", q);
  return buf;
}

}  // namespace sketchloop
