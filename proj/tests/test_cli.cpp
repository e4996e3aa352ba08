#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tvvar/cli.hpp"
#include "tvvar/eval.hpp"
#include "tvvar/io.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kExample = std::string(TVVAR_DATA_DIR) + "/example_3x10.csv";

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = tvvar::run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "tvvar_test_cli" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace

TEST_CASE("fit smoke test on the bundled example") {
    const auto dir = fresh_dir("fit");
    const auto r = run({"fit", "--input", kExample, "--rank", "2", "--out", dir.string()});
    CHECK(r.code == 0);
    for (const char* f : {"W.csv", "V.csv", "X.csv", "G.csv", "manifest.json", "objective_trace.csv"})
        CHECK(fs::exists(dir / f));
    const auto m = tvvar::read_json(dir / "manifest.json");
    CHECK(m["R"] == 2);
    CHECK(m["input_digest"] == tvvar::hex_digest(tvvar::file_digest(kExample)));
    CHECK(m["config"]["cg_iters"] == 5);
    CHECK(m.contains("versions"));
    CHECK(m["outputs"].size() == 5);
}

TEST_CASE("fit is byte-reproducible") {
    const auto a = fresh_dir("det_a");
    const auto b = fresh_dir("det_b");
    CHECK(run({"fit", "--input", kExample, "--rank", "2", "--out", a.string()}).code == 0);
    CHECK(run({"fit", "--input", kExample, "--rank", "2", "--out", b.string()}).code == 0);
    for (const char* f : {"W.csv", "V.csv", "X.csv", "G.csv", "objective_trace.csv"})
        CHECK(slurp(a / f) == slurp(b / f));
}

TEST_CASE("fit argument and data errors map to exit codes") {
    const auto dir = fresh_dir("err");
    const auto too_big = run({"fit", "--input", kExample, "--rank", "4", "--out", dir.string()});
    CHECK(too_big.code == 2);
    CHECK(too_big.err.find("min(N, T-d) = 3") != std::string::npos);
    CHECK(run({"fit", "--input", kExample, "--out", dir.string()}).code == 2);
    CHECK(run({"fit", "--input", kExample, "--rank", "x", "--out", dir.string()}).code == 2);
    CHECK(run({"bogus"}).code == 2);

    std::ofstream(dir / "bad.csv") << "1,2,3\n4,oops,6\n";
    const auto bad = run({"fit", "--input", (dir / "bad.csv").string(), "--rank", "1", "--out", dir.string()});
    CHECK(bad.code == 3);
    CHECK(bad.err.find('\n') == bad.err.size() - 1);
    CHECK(run({"fit", "--input", (dir / "missing.csv").string(), "--rank", "1", "--out", dir.string()}).code == 3);
}

TEST_CASE("fit reads flags from the environment") {
    const auto dir = fresh_dir("env");
    ::setenv("TVVAR_RANK", "1", 1);
    const auto r = run({"fit", "--input", kExample, "--out", dir.string()});
    CHECK(r.code == 0);
    CHECK(tvvar::read_json(dir / "manifest.json")["R"] == 1);
    // the flag wins
    CHECK(run({"fit", "--input", kExample, "--rank", "2", "--out", dir.string()}).code == 0);
    CHECK(tvvar::read_json(dir / "manifest.json")["R"] == 2);
    ::unsetenv("TVVAR_RANK");
}

TEST_CASE("synth then fit end to end") {
    const auto dir = fresh_dir("synth");
    const auto data = (dir / "planted.csv").string();
    CHECK(run({"synth", "--kind", "planted", "--n", "6", "--t", "40", "--rank", "2", "--seed", "4", "--noise", "0.1",
               "--out", data, "--truth", (dir / "truth").string()})
              .code == 0);
    const auto m1 = tvvar::read_json(data + ".manifest.json");
    CHECK(fs::exists(dir / "truth" / "W.csv"));
    CHECK(run({"synth", "--kind", "planted", "--n", "6", "--t", "40", "--rank", "2", "--seed", "4", "--noise", "0.1",
               "--out", data})
              .code == 0);
    CHECK(tvvar::read_json(data + ".manifest.json")["output_digest"] == m1["output_digest"]);

    const auto out = dir / "fit";
    CHECK(run({"fit", "--input", data, "--rank", "2", "--out", out.string(), "--normalize-modes"}).code == 0);
    const auto fitted = tvvar::read_json(out / "manifest.json");
    CHECK(fitted["objective_trace"].back().get<double>() <= fitted["initial_objective"].get<double>());
}

TEST_CASE("synth binary and multires") {
    const auto dir = fresh_dir("synth2");
    const auto bin = (dir / "m.tvm").string();
    CHECK(run({"synth", "--kind", "multires", "--n", "20", "--t", "60", "--switch-t", "30", "--out", bin, "--binary"})
              .code == 0);
    CHECK(run({"dmd", "--input", bin, "--rank", "2", "--binary", "--out", (dir / "dmd").string()}).code == 0);
    CHECK(run({"synth", "--kind", "multires", "--n", "20", "--t", "60", "--switch-t", "70", "--out", bin}).code == 2);
    CHECK(run({"synth", "--kind", "other", "--out", bin}).code == 2);
}

TEST_CASE("dmd smoke test and validation") {
    const auto dir = fresh_dir("dmd");
    CHECK(run({"dmd", "--input", kExample, "--rank", "2", "--out", dir.string()}).code == 0);
    CHECK(fs::exists(dir / "modes.csv"));
    CHECK(fs::exists(dir / "eigenvalues.csv"));
    CHECK(tvvar::read_json(dir / "manifest.json")["modes"].size() == 2);
    CHECK(run({"dmd", "--input", kExample, "--rank", "0", "--out", dir.string()}).code == 2);
    CHECK(run({"dmd", "--input", kExample, "--rank", "1", "--dt", "0", "--out", dir.string()}).code == 2);
}

TEST_CASE("eval subset passes and writes a valid report") {
    const auto dir = fresh_dir("eval");
    const auto path = (dir / "report.json").string();
    const auto r = run({"eval", "--criteria", "1,2", "--out", path});
    CHECK(r.code == 0);
    const auto report = tvvar::read_json(path);
    CHECK(tvvar::eval::check_report_schema(report).empty());
    CHECK(report["criteria"].size() == 2);
}

TEST_CASE("eval negative control names the failing criterion") {
    const auto dir = fresh_dir("fault");
    const auto path = (dir / "report.json").string();
    const auto r = run({"eval", "--criteria", "4", "--inject-fault", "update_W", "--out", path});
    CHECK(r.code == 1);
    CHECK(r.out.find("FAIL [4]") != std::string::npos);
    CHECK(r.out.find("update_W") != std::string::npos);
    const auto report = tvvar::read_json(path);
    CHECK(tvvar::eval::check_report_schema(report).empty());
    CHECK(report["passed"] == false);
}

TEST_CASE("report schema check catches problems") {
    nlohmann::json bad = {{"suite", "quick"}, {"passed", true}, {"criteria", nlohmann::json::array({{{"id", 1}}})}};
    CHECK_FALSE(tvvar::eval::check_report_schema(bad).empty());
    CHECK_FALSE(tvvar::eval::check_report_schema(nlohmann::json::array()).empty());
}
