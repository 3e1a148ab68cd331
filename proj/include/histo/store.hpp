#ifndef HISTO_STORE_HPP
#define HISTO_STORE_HPP

#include "histo/datasets.hpp"
#include "histo/evaluation.hpp"
#include "histo/retrieval.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace histo {

namespace csv {

/// Splits one CSV line, honouring double-quoted fields.
std::vector<std::string> split(const std::string& line);
std::string escape(const std::string& field);
std::string format_number(double value);

}  // namespace csv

/// Columns: path,sample_id,patient_id,label,magnification,fold
void write_manifest(std::ostream& out, const DatasetManifest& manifest);
void write_manifest(const std::string& path, const DatasetManifest& manifest);
DatasetManifest read_manifest(std::istream& in);
DatasetManifest read_manifest(const std::string& path);

/// JSON lines: {sample_id, patient_id, label, kind, mode, values}.
void write_descriptor_record(std::ostream& out, const LabeledSample& sample);
void write_descriptors(const std::string& path, const std::vector<LabeledSample>& samples);
std::vector<LabeledSample> read_descriptors(std::istream& in);
std::vector<LabeledSample> read_descriptors(const std::string& path);

/// Columns: descriptor,mode,k,distance,fold,bac,f1,grr (one row per fold; empty = not computed).
void write_results(std::ostream& out, const std::vector<ResultRecord>& records);
std::vector<ResultRecord> read_results(std::istream& in);
std::vector<ResultRecord> read_results(const std::string& path);

/// Columns: descriptor,distance,mean_relative_rank
void write_distance_ranks(std::ostream& out, const std::vector<DistanceRank>& ranks);

/// Columns: descriptor,mode,k,distance,error
void write_failures(std::ostream& out, const std::vector<CellFailure>& failures);

}  // namespace histo

#endif  // HISTO_STORE_HPP
