#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace {

namespace fs = std::filesystem;

const char* kCli = BIFLUID_LAB_CLI_PATH;

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

int run_cli(const std::string& args) {
    const std::string cmd = std::string(kCli) + " " + args + " > /dev/null 2>&1";
    const int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

const char* kHomogeneousRun = R"json({
  "grid": {"dimension": 2, "points_per_axis": 16},
  "law": {"catalog": "e1", "gamma": 2.0, "beta": [2.0],
          "region": {"a_lower": [0.0], "a_upper": [1.0]}},
  "approx": {"galerkin_modes": 9, "epsilon": 1e-4, "delta": 1e-3, "B": 6.0,
             "mu": 0.1, "lambda": 0.0, "dt": 1e-3, "t_end": 5e-3},
  "initial": {"rho": {"profile": "uniform", "value": 1.0},
              "Z": [{"profile": "proportional", "ratio": 0.5}],
              "velocity": {"profile": "zero"}},
  "output": {"directory": ""}
})json";

}  // namespace

TEST_CASE("cmd_run: homogeneous config completes with a zero residual column") {
    TempDir td("bfl_cli_run");
    write_file(td.path / "run.json", kHomogeneousRun);
    const int rc = run_cli("run --config " + (td.path / "run.json").string() + " --out " +
                           (td.path / "out").string());
    CHECK(rc == 0);
    std::ifstream ledger(td.path / "out" / "ledger.csv");
    REQUIRE(ledger.good());
    std::string header, line;
    std::getline(ledger, header);
    CHECK(header.rfind("step,time,kinetic,helmholtz,dissipation_cum", 0) == 0);
    int residual_col = -1, col = 0;
    {
        std::istringstream hs(header);
        std::string cell;
        while (std::getline(hs, cell, ',')) {
            if (cell == "residual") residual_col = col;
            ++col;
        }
    }
    REQUIRE(residual_col >= 0);
    while (std::getline(ledger, line)) {
        std::istringstream ls(line);
        std::string cell;
        for (int i = 0; i <= residual_col; ++i) std::getline(ls, cell, ',');
        CHECK(std::abs(std::stod(cell)) <= 1e-12);
    }
}

TEST_CASE("cmd_run: inverted admissible band is a config error (exit 1)") {
    TempDir td("bfl_cli_badband");
    std::string cfg = kHomogeneousRun;
    const auto pos = cfg.find("\"a_upper\": [1.0]");
    cfg.replace(pos, std::string("\"a_upper\": [1.0]").size(), "\"a_upper\": [0.0]");
    write_file(td.path / "run.json", cfg);
    CHECK(run_cli("run --config " + (td.path / "run.json").string()) == 1);
}

TEST_CASE("cmd_run: unknown keys are rejected (exit 1)") {
    TempDir td("bfl_cli_unknown");
    std::string cfg = kHomogeneousRun;
    cfg.insert(cfg.rfind('}'), ", \"surprise\": 1");
    write_file(td.path / "run.json", cfg);
    CHECK(run_cli("run --config " + (td.path / "run.json").string()) == 1);
}

TEST_CASE("cmd_run: blow-up exits with code 2") {
    TempDir td("bfl_cli_blowup");
    std::string cfg = kHomogeneousRun;
    auto replace = [&](const std::string& from, const std::string& to) {
        const auto pos = cfg.find(from);
        REQUIRE(pos != std::string::npos);
        cfg.replace(pos, from.size(), to);
    };
    replace("\"dt\": 1e-3, \"t_end\": 5e-3", "\"dt\": 5.0, \"t_end\": 50.0");
    replace("{\"profile\": \"zero\"}",
            "{\"profile\": \"shear\", \"amplitude\": 10.0, \"axis\": 0, \"wave_axis\": 1}");
    replace("{\"profile\": \"uniform\", \"value\": 1.0}",
            "{\"profile\": \"cosine\", \"base\": 1.0, \"amplitude\": 0.4, \"modes\": [1, 1]}");
    write_file(td.path / "run.json", cfg);
    CHECK(run_cli("run --config " + (td.path / "run.json").string()) == 2);
}

TEST_CASE("cmd_audit: catalog law passes (exit 0), malformed JSON exits 1") {
    TempDir td("bfl_cli_audit");
    write_file(td.path / "audit.json", R"json({
      "law": {"catalog": "e1", "gamma": 2.0, "beta": [2.0],
              "region": {"a_lower": [0.0], "a_upper": [1.0]}},
      "sampling": {"rho_points": 61, "s_points": 5}
    })json");
    CHECK(run_cli("audit --config " + (td.path / "audit.json").string() + " --out " +
                  (td.path / "rep").string()) == 0);
    CHECK(fs::exists(td.path / "rep" / "report.json"));

    write_file(td.path / "broken.json", "{ definitely not json");
    CHECK(run_cli("audit --config " + (td.path / "broken.json").string()) == 1);
}

TEST_CASE("cmd_audit: violated bifluid exponents exit 3") {
    TempDir td("bfl_cli_audit3");
    write_file(td.path / "audit.json", R"json({
      "law": {"catalog": "bifluid",
              "plus": {"gamma": 2.0}, "minus": {"gamma": 10.0},
              "region": {"a_lower": [0.0], "a_upper": [1.0]}}
    })json");
    CHECK(run_cli("audit --config " + (td.path / "audit.json").string()) == 3);
}

TEST_CASE("cmd_bifluid_table emits the phase recovery table") {
    TempDir td("bfl_cli_table");
    write_file(td.path / "table.json", R"json({
      "law": {"catalog": "bifluid",
              "plus": {"gamma": "9/5"}, "minus": {"gamma": "6/5"},
              "region": {"a_lower": [0.0], "a_upper": [1.0]}},
      "table": {"rho_min": 0.0, "rho_max": 2.0, "rho_points": 5,
                "Z_min": 0.0, "Z_max": 1.0, "Z_points": 3}
    })json");
    CHECK(run_cli("bifluid-table --config " + (td.path / "table.json").string() + " --out " +
                  (td.path / "out").string()) == 0);
    const std::string csv = slurp(td.path / "out" / "bifluid_table.csv");
    CHECK(csv.rfind("rho,Z,rho_plus,a_frac,P\n", 0) == 0);
    // 5 x 3 points plus the header
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 16);
}

TEST_CASE("cmd_study writes study.csv and is byte-reproducible") {
    TempDir td("bfl_cli_study");
    write_file(td.path / "study.json", R"json({
      "study": {"axis": "delta", "values": [1e-2, 1e-3, 1e-4], "theta": 0.25, "flux_k": 2.0},
      "run": {
        "grid": {"dimension": 2, "points_per_axis": 16},
        "law": {"catalog": "e1", "gamma": 2.0, "beta": [2.0],
                "region": {"a_lower": [0.0], "a_upper": [1.0]}},
        "approx": {"galerkin_modes": 9, "epsilon": 1e-4, "delta": 1e-3, "B": 6.0,
                   "mu": 0.1, "lambda": 0.0, "dt": 1e-3, "t_end": 5e-3},
        "initial": {"rho": {"profile": "cosine", "base": 1.0, "amplitude": 0.1, "modes": [1, 1]},
                    "Z": [{"profile": "proportional", "ratio": 0.5}],
                    "velocity": {"profile": "shear", "amplitude": 0.1, "axis": 0, "wave_axis": 1}},
        "monitors": {"checkpoint_cadence": 1},
        "output": {"directory": ""}
      }
    })json");
    const std::string cmd = "study --config " + (td.path / "study.json").string();
    CHECK(run_cli(cmd + " --out " + (td.path / "a").string()) == 0);
    CHECK(run_cli(cmd + " --out " + (td.path / "b").string()) == 0);
    const std::string a = slurp(td.path / "a" / "study.csv");
    const std::string b = slurp(td.path / "b" / "study.csv");
    CHECK(!a.empty());
    CHECK(a == b);
    // per-rung ledgers are reproducible too
    CHECK(slurp(td.path / "a" / "rung_000" / "ledger.csv") ==
          slurp(td.path / "b" / "rung_000" / "ledger.csv"));
}
