#include "histo/store.hpp"

#include "histo/error.hpp"

#include "json.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace histo {

namespace csv {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (ch == '"') {
        quoted = false;
      } else {
        fields.back() += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.emplace_back();
    } else if (ch != '\r') {
      fields.back() += ch;
    }
  }
  return fields;
}

std::string escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string format_number(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

}  // namespace csv

namespace {

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  return out;
}

int parse_int(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::Parse, "bad " + what + ": '" + s + "'");
  }
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::Parse, "bad " + what + ": '" + s + "'");
  }
}

std::optional<double> parse_optional(const std::string& s, const std::string& what) {
  if (s.empty()) return std::nullopt;
  return parse_double(s, what);
}

// Maps header names to column positions and checks required columns exist.
std::map<std::string, std::size_t> header_index(const std::string& line,
                                                const std::vector<std::string>& required) {
  std::map<std::string, std::size_t> index;
  const auto cols = csv::split(line);
  for (std::size_t i = 0; i < cols.size(); ++i) index[cols[i]] = i;
  for (const auto& r : required) {
    if (!index.count(r)) throw Error(ErrorKind::Parse, "missing CSV column '" + r + "'");
  }
  return index;
}

}  // namespace

void write_manifest(std::ostream& out, const DatasetManifest& manifest) {
  out << "path,sample_id,patient_id,label,magnification,fold\n";
  for (const auto& r : manifest.rows) {
    out << csv::escape(r.path) << ',' << csv::escape(r.sample_id) << ',' << csv::escape(r.patient_id) << ','
        << r.label << ',' << (r.magnification ? std::to_string(*r.magnification) : "") << ','
        << (r.fold ? std::to_string(*r.fold) : "") << '\n';
  }
}

void write_manifest(const std::string& path, const DatasetManifest& manifest) {
  auto out = open_out(path);
  write_manifest(out, manifest);
}

DatasetManifest read_manifest(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::Parse, "empty manifest");
  const auto col = header_index(line, {"path", "sample_id", "patient_id", "label"});
  DatasetManifest m;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = csv::split(line);
    auto get = [&](const std::string& name) -> std::string {
      const auto it = col.find(name);
      return it != col.end() && it->second < f.size() ? f[it->second] : std::string();
    };
    ManifestRow row;
    row.path = get("path");
    row.sample_id = get("sample_id");
    row.patient_id = get("patient_id");
    const std::string where = "manifest line " + std::to_string(line_no) + " ";
    row.label = parse_int(get("label"), where + "label");
    if (const auto mag = get("magnification"); !mag.empty()) row.magnification = parse_int(mag, where + "magnification");
    if (const auto fold = get("fold"); !fold.empty()) row.fold = parse_int(fold, where + "fold");
    m.rows.push_back(std::move(row));
  }
  m.sort_and_validate();
  return m;
}

DatasetManifest read_manifest(const std::string& path) {
  auto in = open_in(path);
  return read_manifest(in);
}

void write_descriptor_record(std::ostream& out, const LabeledSample& s) {
  nlohmann::json j;
  j["sample_id"] = s.sample_id;
  j["patient_id"] = s.patient_id;
  j["label"] = s.label;
  j["kind"] = std::string(to_token(s.descriptor.kind));
  j["mode"] = std::string(to_token(s.descriptor.mode));
  j["values"] = std::vector<double>(s.descriptor.values.data(), s.descriptor.values.data() + s.descriptor.values.size());
  out << j.dump() << '\n';
}

void write_descriptors(const std::string& path, const std::vector<LabeledSample>& samples) {
  auto out = open_out(path);
  for (const auto& s : samples) write_descriptor_record(out, s);
}

std::vector<LabeledSample> read_descriptors(std::istream& in) {
  std::vector<LabeledSample> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      LabeledSample s;
      s.sample_id = j.at("sample_id").get<std::string>();
      s.patient_id = j.at("patient_id").get<std::string>();
      s.label = j.at("label").get<int>();
      const auto kind = parse_descriptor_kind(j.at("kind").get<std::string>());
      const auto mode = parse_channel_mode(j.at("mode").get<std::string>());
      if (!kind || !mode) throw Error(ErrorKind::Parse, "unknown kind or mode");
      const auto values = j.at("values").get<std::vector<double>>();
      s.descriptor = {*kind, *mode, Eigen::Map<const Eigen::VectorXd>(values.data(), Eigen::Index(values.size()))};
      out.push_back(std::move(s));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorKind::Parse, "descriptor line " + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(ErrorKind::Parse, "descriptor line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::vector<LabeledSample> read_descriptors(const std::string& path) {
  auto in = open_in(path);
  return read_descriptors(in);
}

void write_results(std::ostream& out, const std::vector<ResultRecord>& records) {
  out << "descriptor,mode,k,distance,fold,bac,f1,grr\n";
  for (const auto& r : records) {
    for (const auto& f : r.folds) {
      out << to_token(r.cell.kind) << ',' << to_token(r.cell.mode) << ',' << r.cell.k << ','
          << to_token(r.cell.distance) << ',' << f.fold_id << ',' << csv::format_number(f.bac) << ','
          << (f.f1 ? csv::format_number(*f.f1) : "") << ',' << (f.grr ? csv::format_number(*f.grr) : "") << '\n';
    }
  }
}

std::vector<ResultRecord> read_results(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::Parse, "empty results file");
  const auto col = header_index(line, {"descriptor", "mode", "k", "distance", "fold", "bac", "f1", "grr"});
  std::vector<ResultRecord> records;
  std::map<ExperimentCell, std::size_t> position;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = csv::split(line);
    if (f.size() < col.size()) throw Error(ErrorKind::Parse, "results line " + std::to_string(line_no) + " is short");
    const std::string where = "results line " + std::to_string(line_no) + " ";
    const auto kind = parse_descriptor_kind(f[col.at("descriptor")]);
    const auto mode = parse_channel_mode(f[col.at("mode")]);
    const auto dist = parse_distance_kind(f[col.at("distance")]);
    if (!kind || !mode || !dist) throw Error(ErrorKind::Parse, where + "has an unknown token");
    const ExperimentCell cell{*kind, *mode, parse_int(f[col.at("k")], where + "k"), *dist};
    FoldMetrics m;
    m.fold_id = parse_int(f[col.at("fold")], where + "fold");
    m.bac = parse_double(f[col.at("bac")], where + "bac");
    m.f1 = parse_optional(f[col.at("f1")], where + "f1");
    m.grr = parse_optional(f[col.at("grr")], where + "grr");
    auto [it, inserted] = position.emplace(cell, records.size());
    if (inserted) records.push_back({cell, {}});
    records[it->second].folds.push_back(m);
  }
  return records;
}

std::vector<ResultRecord> read_results(const std::string& path) {
  auto in = open_in(path);
  return read_results(in);
}

void write_distance_ranks(std::ostream& out, const std::vector<DistanceRank>& ranks) {
  out << "descriptor,distance,mean_relative_rank\n";
  for (const auto& r : ranks) {
    out << to_token(r.kind) << ',' << to_token(r.distance) << ',' << csv::format_number(r.mean_relative) << '\n';
  }
}

void write_failures(std::ostream& out, const std::vector<CellFailure>& failures) {
  out << "descriptor,mode,k,distance,error\n";
  for (const auto& f : failures) {
    out << to_token(f.cell.kind) << ',' << to_token(f.cell.mode) << ',' << f.cell.k << ','
        << to_token(f.cell.distance) << ',' << csv::escape(f.message) << '\n';
  }
}

}  // namespace histo
