#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct CliResult {
    int exit_code;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path scratch_dir() {
    static fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "basinlab_cli_tests";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

CliResult run_cli(const std::string& args) {
    static int counter = 0;
    fs::path out = scratch_dir() / ("out" + std::to_string(counter) + ".txt");
    fs::path err = scratch_dir() / ("err" + std::to_string(counter) + ".txt");
    ++counter;
    std::string cmd = std::string(BASINLAB_EXE) + " " + args + " >" + out.string() + " 2>" +
                      err.string();
    int status = std::system(cmd.c_str());
    int code = status == -1 ? -1 : WEXITSTATUS(status);
    return {code, slurp(out), slurp(err)};
}

}  // namespace

TEST_CASE("usage errors exit 1") {
    CHECK(run_cli("").exit_code == 1);
    CHECK(run_cli("bogus").exit_code == 1);
    CHECK(run_cli("run --nonsense 3").exit_code == 1);
    CHECK(run_cli("run --function two_depths --trials 0 --steps 10").exit_code == 1);
    // expression landscapes need an explicit interval
    CliResult r = run_cli("run --function \"sin(pi*x)\" --trials 10 --steps 10");
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("interval") != std::string::npos);
}

TEST_CASE("computation errors exit 2") {
    // monotone on [0, 1]: no wells to catalog
    CliResult r = run_cli("analyze --function \"x^2 + x\" --interval 0 1");
    CHECK(r.exit_code == 2);
    CHECK(!r.err.empty());
}

TEST_CASE("analyze reports the two_widths catalog") {
    CliResult r = run_cli("analyze --function two_widths --format json");
    REQUIRE(r.exit_code == 0);
    json j = json::parse(r.out);
    REQUIRE(j.at("wells").size() == 5);
    double w0 = j["wells"][0]["width"].get<double>();
    double w1 = j["wells"][1]["width"].get<double>();
    CHECK(std::abs(w0 - 2.0 / 3.0) < 1e-6);
    CHECK(std::abs(w1 - 4.0 / 3.0) < 1e-6);
    // well objects carry exactly the documented fields
    std::vector<std::string> keys;
    for (auto& [k, v] : j["wells"][0].items()) keys.push_back(k);
    std::sort(keys.begin(), keys.end());
    CHECK(keys == std::vector<std::string>{"center", "depth", "index", "left", "min_value",
                                           "right", "type", "width"});
}

TEST_CASE("analyze csv output") {
    CliResult r = run_cli("analyze --function two_depths --format csv");
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.rfind("index,center,min_value,left,right,width,depth,type\n", 0) == 0);
    CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 13);  // header + 12 wells
}

TEST_CASE("run writes JSON, CSV and a manifest") {
    fs::path dir = scratch_dir() / "run1";
    CliResult r = run_cli("run --function two_widths --trials 400 --steps 80 --eps 0.1 --out " +
                          dir.string());
    REQUIRE(r.exit_code == 0);
    json res = json::parse(slurp(dir / "result.json"));
    long sum = res["escaped"].get<long>();
    for (auto& c : res["counts"]) sum += c.get<long>();
    CHECK(sum == 400);
    CHECK(res["config"]["eps"].get<double>() == 0.1);

    std::string csv = slurp(dir / "histogram.csv");
    CHECK(csv.rfind("index,center,type,count\n", 0) == 0);

    json manifest = json::parse(slurp(dir / "manifest.json"));
    CHECK(manifest["tool"] == "basinlab");
    CHECK(manifest["seed"].get<std::uint64_t>() == 42);
    REQUIRE(manifest["outputs"].size() == 2);
}

TEST_CASE("config files feed runs and flags override them") {
    fs::path cfg_path = scratch_dir() / "cfg.json";
    {
        std::ofstream out(cfg_path);
        out << R"({"function": "two_widths", "trials": 300, "steps": 50, "eps": 0.2, "seed": 9})";
    }
    fs::path dir = scratch_dir() / "run_cfg";
    CliResult r = run_cli("run --config " + cfg_path.string() + " --eps 0.05 --out " +
                          dir.string());
    REQUIRE(r.exit_code == 0);
    json res = json::parse(slurp(dir / "result.json"));
    CHECK(res["config"]["function"] == "two_widths");
    CHECK(res["config"]["trials"].get<long>() == 300);
    CHECK(res["config"]["eps"].get<double>() == 0.05);  // flag beat the file
    CHECK(res["config"]["seed"].get<std::uint64_t>() == 9);
}

TEST_CASE("a manifest's config echo re-ingests to the same resolved config") {
    fs::path dir1 = scratch_dir() / "echo1";
    REQUIRE(run_cli("run --function two_widths --trials 200 --steps 40 --eps 0.15 --seed 7 --out " +
                    dir1.string())
                .exit_code == 0);
    json manifest = json::parse(slurp(dir1 / "manifest.json"));
    fs::path echo_path = scratch_dir() / "echo_cfg.json";
    {
        std::ofstream out(echo_path);
        out << manifest["config"].dump();
    }
    fs::path dir2 = scratch_dir() / "echo2";
    REQUIRE(run_cli("run --config " + echo_path.string() + " --out " + dir2.string()).exit_code ==
            0);
    CHECK(slurp(dir1 / "result.json") == slurp(dir2 / "result.json"));
}

TEST_CASE("identical seeds reproduce results byte for byte") {
    fs::path a = scratch_dir() / "seed_a", b = scratch_dir() / "seed_b";
    std::string args = "run --function two_depths --trials 500 --steps 60 --eps 0.2 --out ";
    REQUIRE(run_cli(args + a.string()).exit_code == 0);
    REQUIRE(run_cli(args + b.string()).exit_code == 0);
    CHECK(slurp(a / "result.json") == slurp(b / "result.json"));
    CHECK(slurp(a / "histogram.csv") == slurp(b / "histogram.csv"));
}

TEST_CASE("sweep emits the pinned CSV header") {
    CliResult r = run_cli(
        "sweep --function two_depths --taus 0.02,0.01 --eps-grid 0 0.1 2 --trials 60 --steps 40 "
        "--format csv");
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.rfind("tau,epsilon,trials,in_interval,escaped,ratio_per_well,ratio_total\n", 0) ==
          0);
    CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 5);  // header + 2 taus x 2 eps
    // sorted by tau then eps
    CHECK(r.out.find("\n0.01,0,") != std::string::npos);
}

TEST_CASE("trace emits a step-by-step CSV") {
    CliResult r = run_cli(
        "trace --function two_depths --p0 0.3 --tau 0.01 --eps 0 --steps 400 --format csv");
    REQUIRE(r.exit_code == 0);
    REQUIRE(r.out.rfind("step,position,value,gradient\n", 0) == 0);
    // flow mode stops early once the gradient is flat; final position is the
    // shallow minimum at 0.5
    auto last_line = r.out.substr(r.out.rfind('\n', r.out.size() - 2) + 1);
    double step, pos;
    REQUIRE(std::sscanf(last_line.c_str(), "%lf,%lf", &step, &pos) == 2);
    CHECK(std::abs(pos - 0.5) < 1e-6);
}

TEST_CASE("plot renders histograms and is byte-stable") {
    fs::path dir = scratch_dir() / "plot_run";
    REQUIRE(run_cli("run --function two_depths --trials 2000 --steps 100 --out " + dir.string())
                .exit_code == 0);
    fs::path svg1 = scratch_dir() / "h1.svg", svg2 = scratch_dir() / "h2.svg";
    REQUIRE(run_cli("plot " + (dir / "histogram.csv").string() + " --kind histogram --output " +
                    svg1.string())
                .exit_code == 0);
    REQUIRE(run_cli("plot " + (dir / "histogram.csv").string() + " --kind histogram --output " +
                    svg2.string())
                .exit_code == 0);
    std::string s = slurp(svg1);
    CHECK(s.rfind("<?xml", 0) == 0);
    CHECK(s.find("</svg>") != std::string::npos);
    CHECK(s == slurp(svg2));
}

TEST_CASE("plot rejects malformed CSV with a line number") {
    fs::path bad = scratch_dir() / "bad.csv";
    {
        std::ofstream out(bad);
        out << "index,center,type,count\n0,0,0,5\n1,oops,0,3\n";
    }
    CliResult r = run_cli("plot " + bad.string() + " --kind histogram --output " +
                          (scratch_dir() / "bad.svg").string());
    CHECK(r.exit_code == 2);
    CHECK(r.err.find("line 3") != std::string::npos);
}

TEST_CASE("plot renders sweep panels") {
    fs::path dir = scratch_dir() / "plot_sweep";
    REQUIRE(run_cli("sweep --function two_depths --taus 0.01,0.02 --eps-grid 0 0.2 3 --trials 50 "
                    "--steps 50 --out " +
                    dir.string())
                .exit_code == 0);
    fs::path svg = scratch_dir() / "sweep.svg";
    REQUIRE(run_cli("plot " + (dir / "sweep.csv").string() + " --kind sweep --output " +
                    svg.string())
                .exit_code == 0);
    std::string s = slurp(svg);
    CHECK(s.find("tau = 0.01") != std::string::npos);
    CHECK(s.find("tau = 0.02") != std::string::npos);
}

TEST_CASE("BASINLAB_THREADS does not change results") {
    fs::path a = scratch_dir() / "thr_a", b = scratch_dir() / "thr_b";
    auto run_with_threads = [](int threads, const fs::path& out) {
        std::string cmd = "env BASINLAB_THREADS=" + std::to_string(threads) + " " +
                          std::string(BASINLAB_EXE) +
                          " run --function two_depths --trials 800 --steps 80 --eps 0.15 --out " +
                          out.string() + " >/dev/null 2>&1";
        return std::system(cmd.c_str());
    };
    REQUIRE(run_with_threads(1, a) == 0);
    REQUIRE(run_with_threads(3, b) == 0);
    CHECK(slurp(a / "result.json") == slurp(b / "result.json"));
}

TEST_CASE("--version prints the tool version") {
    CliResult r = run_cli("--version");
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("basinlab") != std::string::npos);
}
