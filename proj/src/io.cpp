#include "tvvar/io.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>

namespace tvvar {

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t file_digest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return fnv1a64(bytes);
}

std::string hex_digest(std::uint64_t digest) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(digest));
    return buf;
}

std::vector<std::string> write_factor_csvs(const std::filesystem::path& dir, const FactorSet<double>& f) {
    std::filesystem::create_directories(dir);
    write_csv_matrix(dir / "W.csv", f.W);
    write_csv_matrix(dir / "V.csv", f.V);
    write_csv_matrix(dir / "X.csv", f.X);
    write_csv_matrix(dir / "G.csv", f.G);
    return {"W.csv", "V.csv", "X.csv", "G.csv"};
}

nlohmann::json factor_manifest(const FactorSet<double>& f, const FitReport& report) {
    nlohmann::json j;
    j["N"] = f.N();
    j["T"] = f.T();
    j["d"] = f.d;
    j["R"] = f.R;
    j["objective_trace"] = report.objective_trace;
    j["initial_objective"] = report.initial_objective;
    j["sweeps_run"] = report.sweeps_run;
    j["converged"] = report.converged;
    return j;
}

FactorSet<double> read_factors(const std::filesystem::path& dir) {
    const auto manifest = read_json(dir / "manifest.json");
    FactorSet<double> f;
    Eigen::Index N = 0;
    Eigen::Index T = 0;
    try {
        N = manifest.at("N").get<Eigen::Index>();
        T = manifest.at("T").get<Eigen::Index>();
        f.d = manifest.at("d").get<Eigen::Index>();
        f.R = manifest.at("R").get<Eigen::Index>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError((dir / "manifest.json").string() + ": " + e.what());
    }
    f.W = read_csv_matrix(dir / "W.csv");
    f.V = read_csv_matrix(dir / "V.csv");
    f.X = read_csv_matrix(dir / "X.csv");
    f.G = read_csv_matrix(dir / "G.csv");
    try {
        f.validate();
    } catch (const ParameterError&) {
        throw FormatError(dir.string() + ": factor files have inconsistent shapes");
    }
    if (f.N() != N || f.T() != T) throw FormatError(dir.string() + ": factor shapes disagree with manifest");
    return f;
}

namespace {

MatrixXd split_complex(const ComplexMatrix<double>& M) {
    MatrixXd out(M.rows(), 2 * M.cols());
    for (Eigen::Index k = 0; k < M.cols(); ++k) {
        out.col(2 * k) = M.col(k).real();
        out.col(2 * k + 1) = M.col(k).imag();
    }
    return out;
}

} // namespace

std::vector<std::string> write_dmd_csvs(const std::filesystem::path& dir, const DmdResult<double>& r,
                                        double dt) {
    std::filesystem::create_directories(dir);
    write_csv_matrix(dir / "modes.csv", split_complex(r.modes));
    write_csv_matrix(dir / "temporal.csv", split_complex(r.temporal));
    const auto freqs = dmd_frequency_report(r, dt);
    MatrixXd eig(r.rank, 4);
    for (Eigen::Index k = 0; k < r.rank; ++k) {
        const auto& m = freqs[static_cast<std::size_t>(k)];
        // -inf growth is not representable in the CSV reader; clamp to lowest().
        eig.row(k) << m.eigenvalue.real(), m.eigenvalue.imag(),
            std::isinf(m.growth) ? std::numeric_limits<double>::lowest() : m.growth, m.frequency;
    }
    write_csv_matrix(dir / "eigenvalues.csv", eig);
    return {"modes.csv", "temporal.csv", "eigenvalues.csv"};
}

nlohmann::json dmd_manifest(const DmdResult<double>& r, double dt) {
    nlohmann::json modes = nlohmann::json::array();
    for (const auto& m : dmd_frequency_report(r, dt)) {
        const auto k = modes.size();
        modes.push_back({{"eigenvalue", {m.eigenvalue.real(), m.eigenvalue.imag()}},
                         {"amplitude", {r.amplitudes(static_cast<Eigen::Index>(k)).real(),
                                        r.amplitudes(static_cast<Eigen::Index>(k)).imag()}},
                         {"frequency", m.frequency},
                         {"growth", std::isinf(m.growth) ? nlohmann::json("-inf") : nlohmann::json(m.growth)}});
    }
    nlohmann::json j;
    j["R"] = r.rank;
    j["N"] = r.modes.rows();
    j["T"] = r.temporal.rows() + 1;
    j["dt"] = dt;
    j["modes"] = modes;
    j["singular_values"] = std::vector<double>(r.singular_values.data(),
                                               r.singular_values.data() + r.singular_values.size());
    return j;
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

nlohmann::json read_json(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

} // namespace tvvar
