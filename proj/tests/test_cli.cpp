#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

std::string bin() {
    const char* p = std::getenv("SICOVER_BIN");
    return p ? p : "";
}

int run(const std::string& args) {
    std::string cmd = bin() + " " + args + " > /dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("cli: exit codes and outputs" * doctest::skip(false)) {
    if (bin().empty()) {
        MESSAGE("SICOVER_BIN not set; skipping CLI tests");
        return;
    }
    fs::path tmp = fs::temp_directory_path() / "sicover_cli_test";
    fs::remove_all(tmp);

    SUBCASE("validate-measure succeeds for the ball family") {
        CHECK(run("validate-measure --family ball --dim 2 --out " + (tmp / "v").string() +
                  " --check") == 0);
        CHECK(fs::exists(tmp / "v" / "report.json"));
        CHECK(fs::exists(tmp / "v" / "sequences.csv"));
        CHECK(fs::exists(tmp / "v" / "trends.csv"));
        std::string rep = slurp(tmp / "v" / "report.json");
        CHECK(rep.find("\"sandwich_ok\": true") != std::string::npos);
        CHECK(rep.find("0.63661977") != std::string::npos);  // lambda_e = 2/pi
    }

    SUBCASE("unknown family is a config error (exit 2)") {
        CHECK(run("validate-measure --family dodecahedron") == 2);
    }

    SUBCASE("loop soup: constants only, validate works, sampling does not") {
        CHECK(run("validate-measure --family loop-soup") == 0);
        CHECK(run("dump-realization --family loop-soup --lambda 1") == 2);
    }

    SUBCASE("dump-realization emits a JSONL header") {
        CHECK(run("dump-realization --family ball --lambda 0.4 --n 4 --seed 5 --out " +
                  (tmp / "d").string()) == 0);
        std::string text = slurp(tmp / "d" / "realization.jsonl");
        CHECK(text.rfind("{\"type\":\"header\"", 0) == 0);
    }

    SUBCASE("byte-for-byte determinism of outputs") {
        std::string common =
            " --family ball --lambda-grid 0.2,0.5 --n 4 --bigN 3 --depth 3 --replicates 40 --seed 9";
        CHECK(run("scan" + common + " --out " + (tmp / "s1").string()) == 0);
        CHECK(run("scan" + common + " --out " + (tmp / "s2").string()) == 0);
        CHECK(slurp(tmp / "s1" / "scan.csv") == slurp(tmp / "s2" / "scan.csv"));
        CHECK(!slurp(tmp / "s1" / "scan.csv").empty());
    }

    SUBCASE("config file: flat key=value, flags match keys") {
        fs::create_directories(tmp);
        std::ofstream cfg(tmp / "run.cfg");
        cfg << "family=ball\nlambda-grid=0.2,0.4\nn=4\nbigN=3\ndepth=3\nreplicates=30\nseed=4\n";
        cfg.close();
        CHECK(run("scan --config " + (tmp / "run.cfg").string() + " --out " +
                  (tmp / "c").string()) == 0);
        std::string text = slurp(tmp / "c" / "scan.csv");
        CHECK(text.find("0.4") != std::string::npos);
    }
}
