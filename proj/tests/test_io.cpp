#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "helpers.hpp"
#include "specflow/experiments.hpp"
#include "specflow/io.hpp"

using namespace specflow;
using forms::TrigPolyForm;

TEST_CASE("form JSON round trip preserves every term exactly") {
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 4; ++trial) {
    const TrigPolyForm f = specflow::testing::random_form(rng, 3, 1 + trial % 2, 1 + trial % 2, 2, 5);
    const TrigPolyForm back = io::form_from_json(io::form_to_json(f));
    CHECK(back.dim() == f.dim());
    CHECK(back.degree() == f.degree());
    CHECK(back.term_count() == f.term_count());
    TrigPolyForm diff = back;
    diff -= f;
    CHECK(diff.is_zero());
  }
}

TEST_CASE("connection JSON round trip") {
  std::mt19937_64 rng(72);
  const Connection c(3, {0.1, -0.4, 0.9}, specflow::testing::random_u_one_form(rng, 3, 1, 1, 3));
  const Connection back = io::connection_from_json(io::connection_to_json(c));
  CHECK(back.n == c.n);
  CHECK(back.hol == c.hol);
  TrigPolyForm diff = back.osc;
  diff -= c.osc;
  CHECK(diff.is_zero());

  const Connection flat = Connection::flat(1, {0.25});
  const Connection fback = io::connection_from_json(io::connection_to_json(flat));
  CHECK(fback.osc.is_zero());
}

TEST_CASE("config parsing: defaults, overrides, and schema errors") {
  const cli::ExperimentConfig def = cli::ExperimentConfig::from_json(io::json::object());
  CHECK(def.winding_m == std::vector<int>{-3, -2, -1, 0, 1, 2, 3});
  CHECK(def.contact_r == std::vector<double>{4, 6, 8, 12, 16});

  const io::json j = {{"out", "elsewhere"},
                      {"seed", 42},
                      {"winding", {{"m", std::vector<int>{2}}, {"K", 6}}},
                      {"contact", {{"r", std::vector<double>{4.0}}, {"samples", 16}}}};
  const cli::ExperimentConfig cfg = cli::ExperimentConfig::from_json(j);
  CHECK(cfg.out_dir == "elsewhere");
  CHECK(cfg.seed == 42);
  CHECK(cfg.winding_m == std::vector<int>{2});
  CHECK(cfg.winding_K == 6);
  CHECK(cfg.contact_samples == 16);

  io::json bad = j;
  bad["contact"]["theta"] = std::vector<double>{1.0};
  CHECK_THROWS_AS((void)cli::ExperimentConfig::from_json(bad), ContractViolation);

  // round trip through to_json
  const cli::ExperimentConfig again = cli::ExperimentConfig::from_json(cfg.to_json());
  CHECK(again.winding_m == cfg.winding_m);
  CHECK(again.contact_samples == cfg.contact_samples);
}

TEST_CASE("CSV emission: comments, header, rows") {
  const auto path = std::filesystem::temp_directory_path() / "specflow_test" / "t.csv";
  io::write_csv(path, {"units: none", "param x=1"}, {"a", "b"}, {{1.0, 2.0}, {3.0, 4.5}});
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);
  CHECK(line == "# units: none");
  std::getline(in, line);
  CHECK(line == "# param x=1");
  std::getline(in, line);
  CHECK(line == "a,b");
  std::getline(in, line);
  CHECK(line == "1,2");
  std::filesystem::remove_all(std::filesystem::temp_directory_path() / "specflow_test");
}
