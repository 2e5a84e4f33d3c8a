#include <gtest/gtest.h>
#include <sys/wait.h>

#include <boost/property_tree/ini_parser.hpp>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "fbrsim/errors.hpp"
#include "run_config.hpp"
#include "runner.hpp"
#include "table.hpp"

using namespace fbrsim;
using namespace fbrsim::app;
namespace fs = std::filesystem;

namespace {

const fs::path kScratch = FBRSIM_TEST_SCRATCH;
const fs::path kConfigs = FBRSIM_CONFIG_DIR;

fs::path fresh_dir(const std::string& name) {
  const fs::path p = kScratch / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string ini_text(const RunConfig& c) {
  std::ostringstream out;
  boost::property_tree::write_ini(out, to_ptree(c));
  return out.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

// Runs the command line tool; returns its exit status.
int cli(const std::string& args, const fs::path& err = {}) {
  std::string cmd = std::string(FBRSIM_CLI) + " " + args + " > /dev/null";
  cmd += err.empty() ? " 2>&1" : " 2> " + err.string();
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

fs::path write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
  return p;
}

std::string config_error(const std::string& ini) {
  try {
    parse_run_config_string(ini);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, ShippedExamplesParse) {
  int n = 0;
  for (const auto& e : fs::directory_iterator(kConfigs)) {
    if (e.path().extension() != ".ini") continue;
    EXPECT_NO_THROW(load_run_config(e.path()).validate()) << e.path();
    ++n;
  }
  EXPECT_GE(n, 5);
}

TEST(Config, RoundTrip) {
  for (const auto& e : fs::directory_iterator(kConfigs)) {
    if (e.path().extension() != ".ini") continue;
    const RunConfig a = load_run_config(e.path());
    const std::string text = ini_text(a);
    const RunConfig b = parse_run_config_string(text);
    EXPECT_EQ(ini_text(b), text) << e.path();
  }
  EXPECT_EQ(ini_text(parse_run_config_string("")), ini_text(default_run_config()));
}

TEST(Config, AnnotatedExampleMatchesDefaults) {
  EXPECT_EQ(ini_text(load_run_config(kConfigs / "afbr_steady.ini")), ini_text(default_run_config()));
}

TEST(Config, UnitsAndOverrides) {
  const auto c = parse_run_config_string("[conditions]\nP_in = 250\nP_out = 249\nT_in = 700\n");
  EXPECT_EQ(c.cond.P_in, 250e5);
  EXPECT_EQ(c.cond.P_out, 249e5);
  EXPECT_EQ(c.cond.T_in, 700.0);
  const auto s = parse_run_config_string("[step]\nsteps = 5, -5, 10 ; inline comment\n");
  EXPECT_EQ(s.steps, (std::vector<double>{5.0, -5.0, 10.0}));
}

TEST(Config, ErrorsNameTheKey) {
  EXPECT_NE(config_error("[model]\nfoo = 1\n").find("model.foo"), std::string::npos);
  EXPECT_NE(config_error("[model]\nn_cells = abc\n").find("model.n_cells"), std::string::npos);
  EXPECT_NE(config_error("[model]\neos = vdw\n").find("model.eos"), std::string::npos);
  EXPECT_NE(config_error("[nonsense]\nx = 1\n").find("nonsense"), std::string::npos);
  EXPECT_NE(config_error("[conditions]\nx_N2 = 0.5\n").find("x_"), std::string::npos);
  EXPECT_NE(config_error("[model]\nn_cells = 1\n").find("n_cells"), std::string::npos);
}

TEST(Table, WriteReadRoundTrip) {
  const fs::path dir = fresh_dir("table");
  Table t;
  t.columns = {"T [K]", "X_out [-]"};
  t.add_row({700.0, 0.1234567890123456});
  t.add_row({-0.0, std::nan("")});
  EXPECT_THROW(t.add_row({1.0}), std::logic_error);
  write_table(t, dir / "t.csv");
  EXPECT_EQ(slurp(dir / "t.csv"), "T [K],X_out [-]\n700,0.123456789012\n0,nan\n");
  const Table r = read_table(dir / "t.csv");
  EXPECT_EQ(r.columns, t.columns);
  EXPECT_EQ(r.column("X_out"), 1);
  EXPECT_EQ(r.column("X"), -1);
  EXPECT_EQ(r.rows[0][0], 700.0);
  EXPECT_TRUE(std::isnan(r.rows[1][1]));

  write_file(dir / "ragged.csv", "a [-],b [-]\n1,2\n3\n");
  EXPECT_THROW(read_table(dir / "ragged.csv"), ConfigError);
  write_file(dir / "garbled.csv", "a [-]\nxyz\n");
  EXPECT_THROW(read_table(dir / "garbled.csv"), ConfigError);
  EXPECT_THROW(read_table(dir / "missing.csv"), ConfigError);
}

TEST(Cli, SteadyRunWritesProfilesAndMetadata) {
  const fs::path out = fresh_dir("steady");
  ASSERT_EQ(cli("simulate --config " + (kConfigs / "afbr_steady.ini").string() + " --out " + out.string()), 0);
  const Table p = read_table(out / "profiles.csv");
  EXPECT_EQ(p.rows.size(), 100u);
  for (const char* col : {"z", "c_N2", "c_H2", "c_NH3", "c_Ar", "u", "T", "P", "v"}) {
    EXPECT_GE(p.column(col), 0) << col;
  }
  EXPECT_NE(p.columns[p.column("P")].find("[bar]"), std::string::npos);
  const auto meta = nlohmann::json::parse(slurp(out / "metadata.json"));
  EXPECT_EQ(meta["status"], "ok");
  EXPECT_NEAR(meta["results"]["X_out"].get<double>(), 0.121, 0.007);
  EXPECT_EQ(meta["config"]["model"]["eos"], "srk");
}

TEST(Cli, DeterministicTables) {
  const fs::path a = fresh_dir("det_a"), b = fresh_dir("det_b");
  const std::string cfg = (kConfigs / "afbr_steady.ini").string();
  ASSERT_EQ(cli("simulate --config " + cfg + " --cells 40 --out " + a.string()), 0);
  ASSERT_EQ(cli("simulate --config " + cfg + " --cells 40 --out " + b.string()), 0);
  EXPECT_EQ(slurp(a / "profiles.csv"), slurp(b / "profiles.csv"));

  std::ostringstream diff;
  compare_runs(a, b, "T", diff);
  std::istringstream in(diff.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "volume [-],z [m],T_a [K],T_b [K],diff [K],ratio [-]");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    EXPECT_EQ(cells[4], "0");
    EXPECT_EQ(cells[5], "1");
  }
  EXPECT_EQ(rows, 40);
}

TEST(Cli, FlagsOverrideConfig) {
  const fs::path out = fresh_dir("override");
  ASSERT_EQ(cli("simulate --config " + (kConfigs / "afbr_steady.ini").string() +
                " --eos ideal --cells 30 --tol 1e-6 --out " + out.string()),
            0);
  const auto meta = nlohmann::json::parse(slurp(out / "metadata.json"));
  EXPECT_EQ(meta["config"]["model"]["eos"], "ideal");
  EXPECT_EQ(meta["config"]["model"]["n_cells"], "30");
  EXPECT_EQ(read_table(out / "profiles.csv").rows.size(), 30u);
}

TEST(Cli, MalformedConfigExitsTwo) {
  const fs::path dir = fresh_dir("bad");
  const auto cfg = write_file(dir / "bad.ini", "[model]\nn_cells = many\n");
  EXPECT_EQ(cli("simulate --config " + cfg.string() + " --out " + (dir / "out").string(), dir / "err.txt"), 2);
  EXPECT_NE(slurp(dir / "err.txt").find("model.n_cells"), std::string::npos);
  EXPECT_EQ(cli("simulate --out " + (dir / "out").string()), 2);
  EXPECT_EQ(cli("simulate --config " + (dir / "nope.ini").string() + " --out " + (dir / "out").string()), 2);
  EXPECT_EQ(cli("simulate --config " + cfg.string() + " --eos vdw --out x"), 2);
  EXPECT_EQ(cli("frobnicate"), 2);
}

TEST(Cli, HeatOfReactionTable) {
  const fs::path out = fresh_dir("hr");
  ASSERT_EQ(cli("simulate --heat-of-reaction --out " + out.string()), 0);
  const Table t = read_table(out / "heat_of_reaction.csv");
  EXPECT_EQ(t.columns, (std::vector<std::string>{"T [K]", "P [bar]", "dH [J/mol]", "dH_ideal [J/mol]", "ratio [-]"}));
  EXPECT_EQ(t.rows.size(), 11u * 4u);
  bool found = false;
  for (const auto& r : t.rows) {
    if (r[0] == 760.0 && r[1] == 200.0) {
      found = true;
      EXPECT_NEAR(r[4], 1.16, 0.03);
      EXPECT_NEAR(r[2] / r[3], r[4], 1e-9);
    }
  }
  EXPECT_TRUE(found);
}

TEST(Cli, CompareRejectsMismatchedGrids) {
  const fs::path a = fresh_dir("cmp_a"), b = fresh_dir("cmp_b"), dir = fresh_dir("cmp");
  const std::string cfg = (kConfigs / "afbr_steady.ini").string();
  ASSERT_EQ(cli("simulate --config " + cfg + " --cells 20 --out " + a.string()), 0);
  ASSERT_EQ(cli("simulate --config " + cfg + " --cells 30 --out " + b.string()), 0);
  EXPECT_EQ(cli("compare --a " + a.string() + " --b " + b.string() + " --quantity T"), 2);
  EXPECT_EQ(cli("compare --a " + a.string() + " --b " + a.string() + " --quantity nothing"), 2);
  EXPECT_EQ(cli("compare --a " + a.string() + " --b " + a.string() + " --quantity T --out " +
                (dir / "d.csv").string()),
            0);
  EXPECT_EQ(read_table(dir / "d.csv").rows.size(), 20u);
}

TEST(Cli, IdealIdcrSweepHasNarrowWindow) {
  const fs::path out = fresh_dir("idcr_ideal");
  ASSERT_EQ(cli("simulate --config " + (kConfigs / "idcr_sweep.ini").string() + " --eos ideal --out " +
                out.string()),
            0);
  const Table tp = read_table(out / "turning_points.csv");
  ASSERT_EQ(tp.rows.size(), 2u);
  const int p = tp.column("p");
  ASSERT_GE(p, 0);
  EXPECT_NEAR(std::abs(tp.rows[0][p] - tp.rows[1][p]), 8.0, 5.0);
  const Table br = read_table(out / "branch.csv");
  for (const char* col : {"point", "p", "X_out", "T_out", "T_top", "segment", "turning"}) {
    EXPECT_GE(br.column(col), 0) << col;
  }
  // Turning markers in the branch table sit where p reverses direction.
  const int pc = br.column("p"), tc = br.column("turning");
  int marked = 0;
  for (std::size_t k = 1; k + 1 < br.rows.size(); ++k) {
    const double d0 = br.rows[k][pc] - br.rows[k - 1][pc];
    const double d1 = br.rows[k + 1][pc] - br.rows[k][pc];
    if (br.rows[k][tc] != 0.0) {
      ++marked;
      EXPECT_LE(d0 * d1, 0.0) << "row " << k;
    }
  }
  EXPECT_EQ(marked, 2);
}
