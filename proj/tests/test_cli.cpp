#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "qsel/experiment.hpp"
#include "qsel/spin.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace qsel;

namespace {

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("qsel_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p.parent_path());
  return p;
}

fs::path write_config(const std::string& name, const json& doc) {
  fs::path p = scratch(name + ".json");
  write_text(p, doc.dump());
  return p;
}

int tool(const std::string& args) {
  const std::string cmd = "TOOL_LOG=0 " + std::string(QSEL_TOOL) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::vector<double> csv_column(const fs::path& file, const std::string& column) {
  const auto rows = parse_csv(read_text(file));
  size_t c = 0;
  while (c < rows[0].size() && rows[0][c] != column) ++c;
  std::vector<double> out;
  for (size_t r = 1; r < rows.size(); ++r) out.push_back(std::stod(rows[r][c]));
  return out;
}

}  // namespace

TEST(Output, CsvUsesFixedScientificFormat) {
  Table t{"x", {"n", "v", "s"}, {}};
  t.add({3L, 0.1, std::string("a")});
  EXPECT_EQ(to_csv(t), "n,v,s\n3,1.000000000000e-01,a\n");
  EXPECT_THROW(t.add({1L}), Error);
}

TEST(Output, Fnv1aReferenceValues) {
  EXPECT_EQ(hex64(fnv1a("")), "cbf29ce484222325");
  EXPECT_EQ(hex64(fnv1a("a")), "af63dc4c8601ec8c");
}

TEST(Output, SvgIsStandalone) {
  Plot p{"p", "t", "x", "y", true, false, {{"s", {1, 10, 100}, {1, 2, 3}, Series::Style::Points}},
         {{0, 0, 1, 1}}};
  const std::string svg = to_svg(p);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  EXPECT_EQ(svg.find("nan"), std::string::npos);
}

TEST(Config, RejectsUnknownFields) {
  json doc = {{"command", "melin-quad"}, {"params", {{"n", 1}, {"matrix", {1, 0, 0, 1}}}}};
  EXPECT_NO_THROW(parse_config(doc));
  doc["params"]["colour"] = 1;
  EXPECT_THROW(parse_config(doc), Error);
  doc["params"].erase("colour");
  doc["extra"] = true;
  EXPECT_THROW(parse_config(doc), Error);
}

TEST(Config, CommandMustAgree) {
  const json doc = {{"command", "spectrum"}, {"params", {{"N", {4}}}}};
  EXPECT_NO_THROW(parse_config(doc, "spectrum"));
  EXPECT_THROW(parse_config(doc, "cover-demo"), Error);
}

TEST(Config, TypesAreChecked) {
  EXPECT_THROW(parse_config({{"command", "spectrum"}, {"params", {{"N", {2.5}}}}}), Error);
  EXPECT_THROW(parse_config({{"command", "landscape-scan"}, {"params", {{"points", "8"}}}}), Error);
  EXPECT_THROW(parse_config({{"command", "cover-demo"}, {"seed", -1}}), Error);
}

TEST(Config, ModelAcceptsSpacingInsteadOfM) {
  const json doc = {{"command", "modelops-weyl"},
                    {"params", {{"model", {{"preset", "crossing_abs"}, {"R", 40}, {"h", 0.2}}}}}};
  const ExperimentConfig c = parse_config(doc);
  EXPECT_EQ(c.params["model"]["M"].get<int>(), 399);
  EXPECT_FALSE(c.params["model"].contains("h"));
  json clash = doc;
  clash["params"]["model"]["M"] = 100;
  EXPECT_THROW(parse_config(clash), Error);
}

TEST(Config, RoundTripIsFixedPoint) {
  for (const auto& entry : fs::directory_iterator(QSEL_GOLDEN_DIR)) {
    const ExperimentConfig a = load_config(entry.path() / "config.json");
    const json once = to_json(a);
    const json twice = to_json(parse_config(once));
    EXPECT_EQ(once, twice) << entry.path();
  }
}

TEST(Config, ModelValidationErrorsMapToTwo) {
  try {
    parse_config({{"command", "modelops-weyl"}, {"params", {{"model", {{"quartic", -1.0}}}}}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ModelInvalid);
    EXPECT_EQ(exit_code(e.kind()), 2);
  }
  EXPECT_EQ(exit_code(ErrorKind::NoConvergence), 3);
  EXPECT_EQ(exit_code(ErrorKind::UnreliableWindow), 3);
  EXPECT_EQ(exit_code(ErrorKind::MissingGolden), 2);
}

TEST(Run, MelinDiagonalIsOne) {
  const ExperimentConfig c =
      parse_config({{"command", "melin-quad"}, {"params", {{"n", 1}, {"matrix", {1, 0, 0, 1}}}}});
  const ExperimentOutput out = run_experiment(c);
  EXPECT_EQ(out.result["mu"].get<double>(), 1.0);
}

TEST(Tool, MelinQuadWritesMu) {
  const fs::path out = scratch("melin");
  const fs::path cfg = write_config(
      "melin_cfg", {{"command", "melin-quad"}, {"params", {{"n", 1}, {"matrix", {1, 0, 0, 1}}}}});
  ASSERT_EQ(tool("melin-quad --config " + cfg.string() + " --out " + out.string()), 0);
  const json r = json::parse(read_text(out / "result.json"));
  EXPECT_NEAR(r["mu"].get<double>(), 1.0, 1e-14);
  const json m = json::parse(read_text(out / "manifest.json"));
  EXPECT_EQ(m["tool_version"], kToolVersion);
  EXPECT_EQ(m["config_hash"].get<std::string>().size(), 16u);
  for (const auto& f : m["files"]) EXPECT_TRUE(fs::exists(out / f.get<std::string>()));
}

TEST(Tool, LeafScanIsFlat) {
  const fs::path out = scratch("leaf");
  const fs::path cfg = write_config(
      "leaf_cfg", {{"command", "landscape-scan"}, {"params", {{"family", "leaf"}, {"points", 64}}}});
  ASSERT_EQ(tool("landscape-scan --config " + cfg.string() + " --out " + out.string()), 0);
  const auto mu = csv_column(out / "landscape.csv", "mu");
  ASSERT_EQ(mu.size(), 64u);
  const auto [lo, hi] = std::minmax_element(mu.begin(), mu.end());
  EXPECT_LE(*hi - *lo, 1e-8);
  EXPECT_TRUE(fs::exists(out / "landscape.svg"));
}

TEST(Tool, NegativeNExitsTwoWithoutArtifacts) {
  const fs::path out = scratch("negative");
  const fs::path cfg =
      write_config("neg_cfg", {{"command", "spectrum"}, {"params", {{"N", {4, -2}}}}});
  EXPECT_EQ(tool("spectrum --config " + cfg.string() + " --out " + out.string()), 2);
  EXPECT_FALSE(fs::exists(out));
}

TEST(Tool, MissingConfigAndBadFlagsExitTwo) {
  EXPECT_EQ(tool("spectrum --config /nonexistent/cfg.json --out " + scratch("x").string()), 2);
  EXPECT_EQ(tool("spectrum"), 2);
  EXPECT_EQ(tool("no-such-command"), 2);
}

TEST(Tool, UnreliableWindowExitsThree) {
  const fs::path out = scratch("unreliable");
  const fs::path cfg = write_config(
      "unrel_cfg",
      {{"command", "modelops-weyl"},
       {"params",
        {{"model", {{"preset", "crossing_abs"}, {"R", 10}, {"h", 0.5}}},
         {"lambda_min", 5},
         {"lambda_max", 30},
         {"points", 4}}}});
  EXPECT_EQ(tool("modelops-weyl --config " + cfg.string() + " --out " + out.string()), 3);
  EXPECT_FALSE(fs::exists(out));
}

TEST(Tool, DeterministicRerunsAreByteIdentical) {
  const fs::path cfg = write_config(
      "det_cfg", {{"command", "cover-demo"},
                  {"seed", 99},
                  {"params", {{"m", 2}, {"n", 128}, {"a", 0.24}, {"t", 0.2}, {"trials", 4}}}});
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  ASSERT_EQ(tool("cover-demo --deterministic --config " + cfg.string() + " --out " + a.string()), 0);
  ASSERT_EQ(tool("cover-demo --jobs 4 --config " + cfg.string() + " --out " + b.string()), 0);
  for (const char* f : {"boxes.csv", "cover_reports.csv", "result.json", "config.json"})
    EXPECT_EQ(read_text(a / f), read_text(b / f)) << f;
  const json ma = json::parse(read_text(a / "manifest.json"));
  const json mb = json::parse(read_text(b / "manifest.json"));
  EXPECT_EQ(ma["config_hash"], mb["config_hash"]);
}

TEST(Tool, DifferentSeedsChangeRandomDensities) {
  json doc = {{"command", "cover-demo"}, {"seed", 1}, {"params", {{"n", 64}, {"a", 0.24}}}};
  const ExperimentOutput a = run_experiment(parse_config(doc));
  doc["seed"] = 2;
  const ExperimentOutput b = run_experiment(parse_config(doc));
  EXPECT_NE(to_csv(a.tables[1]), to_csv(b.tables[1]));
}

TEST(Golden, TriangleSpectrumMatchesCasimir) {
  const fs::path f = fs::path(QSEL_GOLDEN_DIR) / "triangle_spectrum" / "spectrum.csv";
  const auto n = csv_column(f, "N");
  const auto lam = csv_column(f, "lambda_min");
  bool seen = false;
  for (size_t i = 0; i < n.size(); ++i) {
    EXPECT_NEAR(lam[i], triangle_casimir_ground(static_cast<int>(n[i])), 1e-9);
    if (n[i] == 10) {
      EXPECT_NEAR(lam[i], -1.25, 1e-9);
      seen = true;
    }
  }
  EXPECT_TRUE(seen);
}

TEST(Golden, MelinGoldenIsOne) {
  const json r = json::parse(read_text(fs::path(QSEL_GOLDEN_DIR) / "melin_diag" / "result.json"));
  EXPECT_EQ(r["mu"].get<double>(), 1.0);
}

TEST(Regression, ShippedGoldensPass) {
  EXPECT_EQ(tool("regression --golden " + std::string(QSEL_GOLDEN_DIR) + " --out " +
                 scratch("reg").string()),
            0);
}

TEST(Regression, PerturbedGoldenReportsFieldDiff) {
  const fs::path golden = scratch("perturbed");
  fs::create_directories(golden / "triangle_spectrum");
  const fs::path src = fs::path(QSEL_GOLDEN_DIR) / "triangle_spectrum";
  fs::copy_file(src / "config.json", golden / "triangle_spectrum" / "config.json");
  std::string csv = read_text(src / "spectrum.csv");
  const std::string from = "-1.250000000000e+00", to = "-1.250000100000e+00";
  ASSERT_NE(csv.find(from), std::string::npos);
  csv.replace(csv.find(from), from.size(), to);
  write_text(golden / "triangle_spectrum" / "spectrum.csv", csv);

  const RegressionReport r = regression(golden, scratch("perturbed_work"));
  ASSERT_EQ(r.diffs.size(), 1u);
  EXPECT_EQ(r.diffs[0].file, "spectrum.csv");
  EXPECT_EQ(r.diffs[0].field, "lambda_min[4]");
  EXPECT_EQ(r.diffs[0].expected, to);
  EXPECT_EQ(r.diffs[0].actual, from);

  write_text(golden / "triangle_spectrum" / "tolerances.json",
             R"({"fields": {"spectrum.csv:lambda_min": 1e-6}})");
  EXPECT_TRUE(regression(golden, scratch("perturbed_work2")).passed());
  EXPECT_EQ(tool("regression --golden " + golden.string() + " --out " +
                 scratch("perturbed_tool").string()),
            0);
  fs::remove(golden / "triangle_spectrum" / "tolerances.json");
  EXPECT_EQ(tool("regression --golden " + golden.string() + " --out " +
                 scratch("perturbed_tool2").string()),
            1);
}

TEST(Regression, IntegersCompareExactly) {
  const fs::path golden = scratch("intdiff");
  fs::create_directories(golden / "c");
  const fs::path src = fs::path(QSEL_GOLDEN_DIR) / "weyl_small";
  fs::copy_file(src / "config.json", golden / "c" / "config.json");
  std::string csv = read_text(src / "weyl.csv");
  csv.replace(csv.find(",60,"), 4, ",61,");
  write_text(golden / "c" / "weyl.csv", csv);
  write_text(golden / "c" / "tolerances.json", R"({"default": 0.5})");
  const RegressionReport r = regression(golden, scratch("intdiff_work"));
  ASSERT_EQ(r.diffs.size(), 1u);
  EXPECT_EQ(r.diffs[0].field, "count[5]");
  EXPECT_EQ(r.diffs[0].tolerance, 0.0);
}

TEST(Regression, MissingGolden) {
  try {
    regression(scratch("nothing_here"), scratch("nothing_work"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MissingGolden);
  }
  EXPECT_EQ(tool("regression --golden " + scratch("nothing_here2").string()), 2);
}
