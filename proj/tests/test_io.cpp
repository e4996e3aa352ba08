#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "tvvar/io.hpp"
#include "tvvar/random.hpp"

using namespace tvvar;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / "tvvar_test_io" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

} // namespace

TEST_CASE("fnv1a64 reference values") {
    CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
    CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
    CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
    CHECK(hex_digest(0xabcULL) == "0000000000000abc");
}

TEST_CASE("factor export round trip") {
    RandomStream rng(1);
    FactorSet<double> f;
    f.d = 2;
    f.R = 2;
    f.W = rng.normal_matrix<double>(3, 2);
    f.G = rng.normal_matrix<double>(2, 4);
    f.V = rng.normal_matrix<double>(6, 2);
    f.X = rng.normal_matrix<double>(8, 2);
    FitReport report;
    report.initial_objective = 3.0;
    report.objective_trace = {2.0, 1.0};
    report.sweeps_run = 2;

    const auto dir = fresh_dir("factors");
    const auto files = write_factor_csvs(dir, f);
    CHECK(files.size() == 4);
    const auto m = factor_manifest(f, report);
    CHECK(m["N"] == 3);
    CHECK(m["T"] == 10);
    CHECK(m["objective_trace"].size() == 2);
    write_json(dir / "manifest.json", m);

    const auto back = read_factors(dir);
    CHECK(back.W == f.W);
    CHECK(back.G == f.G);
    CHECK(back.V == f.V);
    CHECK(back.X == f.X);
    CHECK(back.d == 2);

    fs::remove(dir / "G.csv");
    CHECK_THROWS_AS(read_factors(dir), DataError);
}

TEST_CASE("manifest keys are sorted") {
    const auto dir = fresh_dir("json");
    write_json(dir / "m.json", nlohmann::json{{"zeta", 1}, {"alpha", 2}});
    std::ifstream in(dir / "m.json");
    const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    CHECK(text.find("alpha") < text.find("zeta"));
    CHECK(text.back() == '\n');
    CHECK(read_json(dir / "m.json")["zeta"] == 1);
}

TEST_CASE("dmd export shapes") {
    RandomStream rng(2);
    const auto r = fit_dmd(TimeSeriesMatrix(rng.normal_matrix<double>(5, 9)), 3);
    const auto dir = fresh_dir("dmd");
    write_dmd_csvs(dir, r, 1.0);
    CHECK(read_csv_matrix(dir / "modes.csv").cols() == 6);
    CHECK(read_csv_matrix(dir / "temporal.csv").rows() == 8);
    CHECK(read_csv_matrix(dir / "eigenvalues.csv").rows() == 3);
    const auto m = dmd_manifest(r, 1.0);
    CHECK(m["modes"].size() == 3);
    CHECK(m["R"] == 3);
}
