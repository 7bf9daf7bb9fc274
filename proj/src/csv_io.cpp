#include "wats/csv_io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace wats {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_number(const std::string& field, int line_no, const char* what) {
  const char* begin = field.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || !std::isfinite(v)) {
    std::ostringstream os;
    os << "ingest_csv: non-numeric " << what << " '" << field << "' at line " << line_no;
    throw DataError(os.str());
  }
  return v;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

LongitudinalDataset ingest_csv(const std::filesystem::path& path, IngestReport* report) {
  std::ifstream in(path);
  if (!in) throw DataError("ingest_csv: cannot open " + path.string());

  std::string line;
  if (!std::getline(in, line)) throw DataError("ingest_csv: empty file " + path.string());
  {
    auto header = split_csv_line(line);
    if (header.size() != 4 || header[0] != "subject_id" || header[1] != "group" ||
        header[2] != "time" || header[3] != "value")
      throw DataError("ingest_csv: expected header subject_id,group,time,value");
  }

  struct Row {
    std::string group;
    double time;
    double value;
  };
  // first-appearance order for subjects and groups
  std::vector<std::string> subject_order, group_order;
  std::map<std::string, std::vector<Row>> rows;
  std::set<std::pair<std::string, double>> seen;
  std::set<double> times;

  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != 4) {
      std::ostringstream os;
      os << "ingest_csv: expected 4 fields at line " << line_no;
      throw DataError(os.str());
    }
    Row r;
    r.group = fields[1];
    r.time = parse_number(fields[2], line_no, "time");
    r.value = parse_number(fields[3], line_no, "value");
    const std::string& id = fields[0];
    if (!seen.insert({id, r.time}).second) {
      std::ostringstream os;
      os << "ingest_csv: duplicate (subject, time) = (" << id << ", " << fields[2]
         << ") at line " << line_no;
      throw DataError(os.str());
    }
    if (rows.find(id) == rows.end()) subject_order.push_back(id);
    if (std::find(group_order.begin(), group_order.end(), r.group) == group_order.end())
      group_order.push_back(r.group);
    rows[id].push_back(r);
    times.insert(r.time);
  }
  if (times.size() < 2) throw DataError("ingest_csv: need at least two distinct times");

  TimeGrid grid(std::vector<double>(times.begin(), times.end()));
  std::vector<SubjectRecord> subjects;
  for (const std::string& id : subject_order) {
    auto& rlist = rows[id];
    std::sort(rlist.begin(), rlist.end(),
              [](const Row& a, const Row& b) { return a.time < b.time; });
    for (std::size_t i = 1; i < rlist.size(); ++i) {
      if (rlist[i].group != rlist[0].group)
        throw DataError("ingest_csv: subject '" + id + "' appears in more than one group");
    }
    if (rlist.front().time != grid.first()) {
      if (report)
        report->rejected.push_back("subject '" + id + "': no baseline observation at t=" +
                                   format_number(grid.first()));
      continue;
    }
    SubjectRecord rec;
    rec.id = id;
    rec.group = static_cast<int>(
        std::find(group_order.begin(), group_order.end(), rlist[0].group) - group_order.begin());
    for (const Row& r : rlist) {
      rec.times.push_back(r.time);
      rec.values.push_back(r.value);
    }
    subjects.push_back(std::move(rec));
  }
  if (subjects.empty()) throw DataError("ingest_csv: no usable subjects");
  return LongitudinalDataset(std::move(grid), std::move(group_order), std::move(subjects));
}

void write_dataset_csv(const LongitudinalDataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw DataError("write_dataset_csv: cannot open " + path.string());
  out << "subject_id,group,time,value\n";
  for (const SubjectRecord& s : data.subjects()) {
    for (int j = 0; j < s.n_obs(); ++j) {
      out << s.id << ',' << data.group_labels()[s.group] << ',' << format_number(s.times[j])
          << ',' << format_number(s.values[j]) << '\n';
    }
  }
}

}  // namespace wats
