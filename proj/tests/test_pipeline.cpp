#include "doctest.h"
#include "scratch.hpp"

#include "histo/error.hpp"
#include "histo/pipeline.hpp"
#include "histo/store.hpp"

#include <fstream>
#include <sstream>

using namespace histo;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string config_error(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Config);
    return e.what();
  }
  FAIL("expected a ConfigError");
  return {};
}

std::size_t data_lines(const fs::path& csv) {
  std::ifstream in(csv);
  std::string line;
  std::size_t n = 0;
  std::getline(in, line);
  while (std::getline(in, line)) n += !line.empty();
  return n;
}

}  // namespace

TEST_CASE("config parsing") {
  std::istringstream in(
      "# experiment\n"
      "dataset = synthetic\n"
      "descriptors = felp, lbp\n"
      "modes = all\n"
      "k = 1,5\n"
      "distances = l1,chi2  # two\n"
      "beta = 0.2\n"
      "filter_artefacts = true\n"
      "threads = 2\n");
  const RunConfig c = parse_config(in);
  CHECK(c.kinds == std::vector<DescriptorKind>{DescriptorKind::FELP, DescriptorKind::LBP});
  CHECK(c.modes.size() == 3);
  CHECK(c.ks == std::vector<int>{1, 5});
  CHECK(c.distances == std::vector<DistanceKind>{DistanceKind::L1, DistanceKind::ChiSquared});
  CHECK(c.stain.od_threshold == 0.2);
  CHECK(c.filter_artefacts);
  CHECK(c.effective_threads() == 2);

  const std::string msg = config_error([] { parse_distance_list("l1,emd"); });
  CHECK(msg.find("emd") != std::string::npos);
  for (const char* token : {"l1", "l2", "cosine", "correlation", "chi2", "hutchinson"}) CHECK(msg.find(token) != std::string::npos);

  config_error([] { parse_mode_list("cmyk"); });
  config_error([] { parse_k_list("0"); });
  config_error([] {
    RunConfig c;
    apply_setting(c, "colour", "red");
  });
  config_error([] {
    RunConfig c;
    c.dataset = "breakhis";
    c.root = "/nonexistent/path";
    c.validate();
  });
}

TEST_CASE("single-cell run and determinism") {
  const auto out = scratch_dir("pipeline-single");
  RunConfig c;
  c.kinds = {DescriptorKind::ELP};
  c.modes = {ChannelMode::HE};
  c.ks = {1};
  c.distances = {DistanceKind::L1};
  c.out_dir = out.string();
  c.threads = 2;
  std::ostringstream log;
  const RunSummary s = run_pipeline(c, log);
  CHECK(s.samples == 40);
  CHECK(s.failed_cells == 0);
  CHECK(s.result_rows == 5);
  CHECK(data_lines(out / "results.csv") == 5);
  for (const char* f : {"manifest.csv", "folds.txt", "descriptors_elp_he.jsonl", "failures.csv", "report.md",
                        "rank_distances.csv", "run.json"}) {
    CHECK(fs::exists(out / f));
  }
  const std::string first = slurp(out / "results.csv");
  const std::string descriptors = slurp(out / "descriptors_elp_he.jsonl");

  c.threads = 1;
  run_pipeline(c, log);
  CHECK(slurp(out / "results.csv") == first);
  CHECK(slurp(out / "descriptors_elp_he.jsonl") == descriptors);
}

TEST_CASE("row count equals the matrix size") {
  const auto out = scratch_dir("pipeline-matrix");
  RunConfig c;
  c.kinds = {DescriptorKind::FELP, DescriptorKind::LBP};
  c.modes = {ChannelMode::Greyscale, ChannelMode::RGB};
  c.ks = {1, 3};
  c.distances = {DistanceKind::L2, DistanceKind::Cosine, DistanceKind::Hutchinson};
  c.fixture.patches_per_class = 3;
  c.out_dir = out.string();
  std::ostringstream log;
  const RunSummary s = run_pipeline(c, log);
  CHECK(s.result_rows + 5 * s.failed_cells == 2 * 2 * 2 * 3 * 5);
  const auto ranks = data_lines(out / "rank_distances.csv");
  CHECK(ranks == 2 * 3);
}

TEST_CASE("HE extraction shares one basis per patient") {
  const auto root = scratch_dir("pipeline-extract");
  synthetic::FixtureSpec spec;
  spec.patients = 2;
  spec.patches_per_class = 2;
  synthetic::write_fixture(root.string(), spec);
  const auto manifest = ingest_idc(root.string()).manifest;
  const auto grouped = extract_dataset(manifest, {DescriptorKind::LBP}, ChannelMode::HE, {}, {}, GroupBy::Patient, 2);
  const auto single = extract_dataset(manifest, {DescriptorKind::LBP}, ChannelMode::HE, {}, {}, GroupBy::None, 2);
  REQUIRE(grouped.samples.at(DescriptorKind::LBP).size() == 8);
  REQUIRE(single.samples.at(DescriptorKind::LBP).size() == 8);
  CHECK(grouped.failures.empty());
  for (const auto& s : grouped.samples.at(DescriptorKind::LBP)) CHECK(s.descriptor.values.size() == 36);
}
